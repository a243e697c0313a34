# Empty init for pytest discovery
