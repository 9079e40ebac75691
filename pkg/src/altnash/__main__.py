from altnash.cli import main
main()
