"""Rebuild law_school.csv from the one-hot law.csv.zip shipped in the ethicml wheel.

usage: python convert_ethicml.py ethicml-1.3.0-py3-none-any.whl
"""
import io
import sys
import zipfile

import pandas as pd

RACES = ["Amerindian", "Asian", "Black", "Hispanic", "Mexican", "Other", "Puertorican", "White"]


def main(wheel: str) -> None:
    raw = zipfile.ZipFile(wheel).read("ethicml/data/csvs/law.csv.zip")
    d = pd.read_csv(io.BytesIO(raw), compression="zip")
    race = d[[f"Race_{r}" for r in RACES]].to_numpy().argmax(axis=1)
    out = pd.DataFrame(
        {
            "race": [RACES[k] for k in race],
            "sex": (d["Sex_2"] + 1).astype(int),
            "LSAT": d["LSAT"],
            "UGPA": d["UGPA"],
            "ZFYA": d["ZFYA"],
            "first_pf": d["PF_1"].astype(int),
        }
    )
    out.to_csv("law_school.csv", index=False)
    print(f"wrote {len(out)} rows")


if __name__ == "__main__":
    main(sys.argv[1])
