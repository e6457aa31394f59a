#!/usr/bin/env python3
"""Convert the North Atlantic rows of an IBTrACS WMO-agency CSV into
canonical HURDAT2 text.

The input is the ``wmo.csv`` table shipped inside the huracanpy wheel
(``huracanpy/_data/_ibtracs_files/wmo.csv``, columns
track_id,season,basin,time,lon,lat,wind,slp). For the NA basin the WMO agency
is NHC, so positions, winds and pressures are the HURDAT2 best-track values.

Fields IBTrACS does not carry in that table are filled as follows:
  * cyclone number: order of first fix within the season
  * name: UNNAMED
  * status: HU/TS/TD from maximum wind (>=64 kt, >=34 kt, otherwise)
  * record identifier: blank
  * wind radii: -999
"""
import argparse
import csv
from collections import OrderedDict


def fmt_lat(lat):
    return f"{abs(lat):.1f}{'N' if lat >= 0 else 'S'}"


def fmt_lon(lon):
    return f"{abs(lon):.1f}{'W' if lon < 0 else 'E'}"


def status_for(wind):
    if wind is None:
        return "TD"
    if wind >= 64:
        return "HU"
    if wind >= 34:
        return "TS"
    return "TD"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("wmo_csv")
    ap.add_argument("output")
    ap.add_argument("--year-from", type=int, default=1980)
    ap.add_argument("--year-to", type=int, default=2012)
    args = ap.parse_args()

    tracks = OrderedDict()
    with open(args.wmo_csv, newline="") as fh:
        for row in csv.DictReader(fh):
            if row["basin"] != "NA":
                continue
            tracks.setdefault(row["track_id"], []).append(row)

    by_season = {}
    for tid, rows in tracks.items():
        season = int(rows[0]["season"])
        if args.year_from <= season <= args.year_to:
            by_season.setdefault(season, []).append(rows)

    lines = []
    for season in sorted(by_season):
        storms = sorted(by_season[season], key=lambda r: r[0]["time"])
        for number, rows in enumerate(storms, start=1):
            lines.append(f"AL{number:02d}{season:4d},{'UNNAMED':>19},{len(rows):>7},")
            for r in rows:
                date, clock = r["time"].split(" ")
                ymd = date.replace("-", "")
                hhmm = clock[:5].replace(":", "")
                wind = int(float(r["wind"])) if r["wind"] else None
                slp = int(float(r["slp"])) if r["slp"] else None
                lon = float(r["lon"])
                if lon > 180:
                    lon -= 360
                fields = [
                    ymd,
                    f" {hhmm}",
                    "  ",
                    f" {status_for(wind)}",
                    f" {fmt_lat(float(r['lat'])):>5}",
                    f" {fmt_lon(lon):>6}",
                    f" {wind if wind is not None else -99:>3}",
                    f" {slp if slp is not None else -999:>4}",
                ] + [" -999"] * 12
                lines.append(",".join(fields) + ",")
    with open(args.output, "w", newline="\n") as out:
        out.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
