from py_rigidsq.cli import main

if __name__ == "__main__":
    main()
