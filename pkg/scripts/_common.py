import csv


def floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def print_columns(path, columns):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh, delimiter="\t"))
    print("\t".join(columns))
    for r in rows:
        print("\t".join(r.get(c, "") for c in columns))
