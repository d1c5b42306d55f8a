#!/usr/bin/env python3
"""Regenerates the committed GeoLife fixture corpus in place.

Deterministic: rerunning produces byte-identical files. The expected
ingest numbers are asserted at the bottom and frozen into the C++ tests:

  trajectories  walk 6, bike 5, bus 5, car_taxi 5  (total 21)
  dropped_short {bus: 1}; dropped_other_mode 1; unlabeled_points 3
  users: u01 u02 ok, u03 unlabeled, u04 corrupt labels
"""

import os
from datetime import datetime, timedelta

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "Data")

HEADER = [
    "Geolife trajectory",
    "WGS 84",
    "Altitude is in Feet",
    "Reserved 3",
    "0,2,255,My Track,0,0,2,8421376",
    "0",
]

CANONICAL = {"walk": "walk", "walking": "walk", "bike": "bike", "bus": "bus",
             "car": "car_taxi", "taxi": "car_taxi"}

NOISE_SCALE = {"walk": 0.00002, "bike": 0.00005, "bus": 0.0001,
               "car": 0.0002, "taxi": 0.0002, "train": 0.0003, "Walk": 0.00002}


class Lcg:
    def __init__(self, seed):
        self.state = seed

    def next01(self):
        self.state = (1103515245 * self.state + 12345) % (1 << 31)
        return self.state / (1 << 31)


def fmt_time(t, sep):
    return t.strftime(f"%Y{sep}%m{sep}%d") + "," + t.strftime("%H:%M:%S") if sep == "-" \
        else t.strftime("%Y/%m/%d %H:%M:%S")


def plt_line(lat, lon, t):
    serial = (t - datetime(1899, 12, 30)).total_seconds() / 86400.0
    return f"{lat:.6f},{lon:.6f},0,164,{serial:.6f},{fmt_time(t, '-')}"


def build_day(segments, start, seg_counter, rng, gap=60, trailing_unlabeled=0):
    """segments: list of (raw_mode, n_points, step_s). Returns
    (plt_lines, label_rows, next_counter, expected per-mode keeps)."""
    lines = []
    labels = []
    keeps = {}
    t = start
    for raw_mode, n_points, step in segments:
        base_lat = 39.9 + 0.002 * seg_counter
        base_lon = 116.3 + 0.002 * seg_counter
        scale = NOISE_SCALE[raw_mode]
        first = t
        for i in range(n_points):
            lat = base_lat + i * scale * 0.5 + (rng.next01() - 0.5) * scale * 2
            lon = base_lon + i * scale * 0.4 + (rng.next01() - 0.5) * scale * 2
            lines.append(plt_line(lat, lon, t))
            last = t
            t += timedelta(seconds=step)
        labels.append((first, last, raw_mode))
        canonical = CANONICAL.get(raw_mode.lower())
        if canonical is not None and n_points >= 10:
            keeps[canonical] = keeps.get(canonical, 0) + 1
        seg_counter += 1
        t = last + timedelta(seconds=gap)
    for i in range(trailing_unlabeled):
        lines.append(plt_line(39.5 + i * 0.001, 116.0, t))
        t += timedelta(seconds=10)
    return lines, labels, seg_counter, keeps


def write(path, lines, ending):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", newline="") as f:
        for line in lines:
            f.write(line + ending)


def main():
    rng = Lcg(20081023)
    totals = {}

    def add(keeps):
        for mode, n in keeps.items():
            totals[mode] = totals.get(mode, 0) + n

    # u01: two days; day 1 carries the short bus segment, the train
    # segment, and three unlabeled trailing points
    u01_day1 = [("walk", 12, 2), ("bus", 11, 5), ("car", 10, 3), ("walk", 13, 2),
                ("taxi", 12, 4), ("bike", 11, 3), ("bus", 8, 5), ("train", 11, 6),
                ("bus", 10, 5), ("walk", 11, 2)]
    lines1, labels1, counter, keeps = build_day(
        u01_day1, datetime(2008, 10, 23, 2, 53, 4), 0, rng, trailing_unlabeled=3)
    add(keeps)
    u01_day2 = [("walk", 10, 2), ("bike", 12, 3), ("bus", 11, 4), ("car", 14, 3),
                ("bike", 13, 3)]
    lines2, labels2, counter, keeps = build_day(
        u01_day2, datetime(2008, 10, 24, 9, 0, 0), counter, rng)
    add(keeps)

    write(os.path.join(ROOT, "u01", "Trajectory", "20081023025304.plt"),
          HEADER + lines1, "\r\n")
    write(os.path.join(ROOT, "u01", "Trajectory", "20081024090000.plt"),
          HEADER + lines2, "\r\n")
    label_rows = ["Start Time\tEnd Time\tTransportation Mode"]
    for first, last, mode in labels1 + labels2:
        label_rows.append(f"{fmt_time(first, '/')}\t{fmt_time(last, '/')}\t{mode}")
    write(os.path.join(ROOT, "u01", "labels.txt"), label_rows, "\r\n")

    # u02: bike/Walk pair sharing the 08:05:00 boundary point (the bike
    # interval sorts first and claims it), then ordinary segments
    boundary = datetime(2008, 11, 1, 8, 5, 0)
    bike_lines = []
    base_lat, base_lon = 39.9 + 0.002 * counter, 116.3 + 0.002 * counter
    t = datetime(2008, 11, 1, 8, 0, 0)
    for i in range(16):
        lat = base_lat + i * 0.00005 * 0.5 + (rng.next01() - 0.5) * 0.0001
        lon = base_lon + i * 0.00005 * 0.4 + (rng.next01() - 0.5) * 0.0001
        bike_lines.append(plt_line(lat, lon, t))
        t += timedelta(seconds=20)
    counter += 1
    walk_lines = []
    base_lat, base_lon = 39.9 + 0.002 * counter, 116.3 + 0.002 * counter
    t = datetime(2008, 11, 1, 8, 5, 20)
    for i in range(15):
        lat = base_lat + i * 0.00002 * 0.5 + (rng.next01() - 0.5) * 0.00004
        lon = base_lon + i * 0.00002 * 0.4 + (rng.next01() - 0.5) * 0.00004
        walk_lines.append(plt_line(lat, lon, t))
        t += timedelta(seconds=20)
    counter += 1
    totals["bike"] = totals.get("bike", 0) + 1
    totals["walk"] = totals.get("walk", 0) + 1

    u02_rest = [("walk", 10, 2), ("bus", 12, 5), ("car", 11, 3), ("taxi", 10, 4),
                ("bike", 10, 3), ("bus", 13, 5)]
    rest_lines, rest_labels, counter, keeps = build_day(
        u02_rest, datetime(2008, 11, 1, 9, 0, 0), counter, rng)
    add(keeps)

    write(os.path.join(ROOT, "u02", "Trajectory", "20081101080000.plt"),
          HEADER + bike_lines + walk_lines + rest_lines, "\n")
    label_rows = ["Start Time\tEnd Time\tTransportation Mode",
                  f"{fmt_time(datetime(2008, 11, 1, 8, 0, 0), '/')}\t{fmt_time(boundary, '/')}\tbike",
                  f"{fmt_time(boundary, '/')}\t{fmt_time(datetime(2008, 11, 1, 8, 10, 0), '/')}\tWalk"]
    for first, last, mode in rest_labels:
        label_rows.append(f"{fmt_time(first, '/')}\t{fmt_time(last, '/')}\t{mode}")
    write(os.path.join(ROOT, "u02", "labels.txt"), label_rows, "\n")

    # u03: trajectories but no labels.txt
    u03_lines = [plt_line(40.0 + i * 0.001, 116.4, datetime(2008, 12, 25, 12, 0, i * 5))
                 for i in range(5)]
    write(os.path.join(ROOT, "u03", "Trajectory", "20081225120000.plt"),
          HEADER + u03_lines, "\n")

    # u04: labels.txt whose header is wrong
    write(os.path.join(ROOT, "u04", "labels.txt"),
          ["start\tend\tmode", "2008/01/01 00:00:00\t2008/01/01 01:00:00\twalk"], "\n")

    assert totals == {"walk": 6, "bike": 5, "bus": 5, "car_taxi": 5}, totals
    print("fixture written:", totals)


if __name__ == "__main__":
    main()
