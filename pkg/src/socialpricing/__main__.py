from socialpricing.cli import main

main()
