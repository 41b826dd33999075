from urcminer.cli import main

main()
