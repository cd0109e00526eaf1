"""
Selberg Lab command line

    python app.py spectrum --builtin octagon --cutoff 3.1 --max-depth 6 --out s.csv
    python app.py zeta --builtin octagon --cutoff 3.1 --max-depth 6 --s 2 --s 3 --out z.csv
    python app.py t0 --genus 2 --out t0.json

Run `python app.py --help` for every command.
"""

from src.cli import main

if __name__ == "__main__":
    main()
