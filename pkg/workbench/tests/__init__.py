# Test suite for the workbench engines and CLI
