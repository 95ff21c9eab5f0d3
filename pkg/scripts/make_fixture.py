"""Regenerate the bundled 200-row synthetic movie fixture.

Usage: python3 scripts/make_fixture.py
"""

import csv
import math
import os

import numpy as np

GENRES = [
    "Action", "Adventure", "Animation", "Biography", "Comedy", "Crime", "Drama",
    "Family", "Fantasy", "Horror", "Music", "Musical", "Mystery", "Romance",
    "Sport", "Thriller", "War",
]

GENRE_EFFECT = {
    "Drama": 4.0, "Biography": 3.0, "Crime": 2.0, "Mystery": 1.0, "War": 2.0,
    "Horror": -4.0, "Action": -2.0, "Comedy": -1.0, "Family": -1.0, "Sport": -2.0,
}

ADJECTIVES = [
    "Silent", "Crimson", "Golden", "Hidden", "Broken", "Electric", "Midnight",
    "Paper", "Iron", "Velvet", "Distant", "Burning", "Frozen", "Wild", "Lost",
    "Final", "Second", "Northern", "Hollow", "Glass",
]
NOUNS = [
    "Harbor", "Empire", "Garden", "Signal", "Horizon", "Letter", "Winter",
    "Mirror", "Anthem", "Voyage", "Orchard", "Circuit", "Summit", "River",
    "Lantern", "Echo", "Crossing", "Parade", "Archive", "Meridian",
]

DAYS_IN_MONTH = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]


def main():
    rng = np.random.default_rng(12345)
    rows = []
    n = 200
    for i in range(n):
        if i < 10:
            year = int(rng.integers(1985, 1990))
        elif i < 160:
            year = int(rng.integers(1990, 2016))
        else:
            year = int(rng.integers(2016, 2020))
        month = int(rng.integers(1, 13))
        day = int(rng.integers(1, DAYS_IN_MONTH[month - 1] + 1))

        n_genres = int(rng.integers(1, 4))
        picked = set(rng.choice(GENRES, size=n_genres, replace=False).tolist())
        if i < len(GENRES):
            picked.add(GENRES[i])  # guarantee full vocabulary coverage

        quality = float(rng.normal())
        seasonal = 3.0 * math.sin(2.0 * math.pi * month / 12.0)
        effect = sum(GENRE_EFFECT.get(g, 0.0) for g in picked)
        metascore = 55.0 + 18.0 * quality + seasonal + effect + float(rng.normal(0, 6))
        metascore = int(min(max(round(metascore), 0), 100))

        top1000 = min(max(5.5 + 1.1 * quality + float(rng.normal(0, 0.3)), 0.0), 10.0)
        avg_vote = min(max(5.7 + 0.9 * quality + float(rng.normal(0, 0.6)), 1.0), 10.0)
        duration = int(min(max(rng.normal(105, 15), 60), 190))
        votes = int(np.exp(rng.normal(9.0, 1.2)))
        budget = round(float(np.exp(rng.normal(16.0, 1.0))), 2)
        reviews_users = int(max(rng.normal(120 + 40 * quality, 40), 1))
        reviews_critics = int(max(rng.normal(60 + 25 * quality, 20), 1))

        title = f"{ADJECTIVES[i % 20]} {NOUNS[(i * 7) % 20]} {i + 1}"
        row = {
            "title": title,
            "year": year,
            "date_published": f"{year:04d}-{month:02d}-{day:02d}",
            "duration": duration,
            "avg_vote": round(avg_vote, 1),
            "votes": votes,
            "genres": ", ".join(sorted(picked)),
            "top1000_voters_rating": round(top1000, 1),
            "budget": budget,
            "reviews_from_users": reviews_users,
            "reviews_from_critics": reviews_critics,
            "metascore": metascore,
        }
        # sprinkle realistic missingness
        if rng.random() < 0.08:
            row["metascore"] = "N/A"
        if rng.random() < 0.15:
            row["budget"] = ""
        if rng.random() < 0.05:
            row["top1000_voters_rating"] = "N/A"
        if rng.random() < 0.05:
            row["reviews_from_users"] = ""
        rows.append(row)

    out = os.path.join(os.path.dirname(__file__), "..", "src", "cinestat", "data", "movies_fixture.csv")
    out = os.path.normpath(out)
    os.makedirs(os.path.dirname(out), exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    main()
