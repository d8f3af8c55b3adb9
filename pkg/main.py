"""Run the latcover command line from a source checkout: `python main.py covering-check ...`"""
from latcover.main import main

if __name__ == "__main__":
    main()
