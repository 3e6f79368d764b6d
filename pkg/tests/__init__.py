# Tests for the PGAS MD bench
