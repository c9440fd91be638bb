# Subcommands
