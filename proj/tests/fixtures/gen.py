#!/usr/bin/env python3
"""Regenerates the committed synthetic fixture set (deterministic)."""
import random
import struct
from pathlib import Path

HERE = Path(__file__).parent
rng = random.Random(7)

ADJS = ["happy", "sad", "old", "beautiful", "lonely",
        "bright", "dark", "quiet", "wild", "gentle"]
NOUNS = ["dog", "house", "beach", "city", "forest", "child",
         "sky", "river", "face", "girl", "man", "flower"]

# pivot ANP inventory
anps = [(a, n) for a in ADJS for n in NOUNS]
rng.shuffle(anps)
anps = anps[:80]


def polarity(a, n, jitter):
    base = {"happy": 0.8, "beautiful": 0.7, "bright": 0.5, "gentle": 0.4,
            "quiet": 0.1, "wild": -0.1, "old": -0.2, "dark": -0.5,
            "lonely": -0.6, "sad": -0.8}[a]
    p = base + jitter
    return max(-1.0, min(1.0, round(p, 3)))


# --- embeddings ------------------------------------------------------------
tokens = ADJS + NOUNS + [f"{a}_{n}" for a, n in anps[:30]] + ["runs", "sun"]
dim = 8
vectors = {}
for tok in tokens:
    vectors[tok] = [round(rng.uniform(-1, 1), 6) for _ in range(dim)]

with open(HERE / "embeddings.txt", "w") as f:
    f.write(f"{len(vectors)} {dim}\n")
    for tok, vec in vectors.items():
        f.write(tok + " " + " ".join(f"{v:.6f}" for v in vec) + "\n")

with open(HERE / "embeddings.bin", "wb") as f:
    f.write(f"{len(vectors)} {dim}\n".encode())
    for tok, vec in vectors.items():
        f.write(tok.encode() + b" ")
        f.write(struct.pack(f"<{dim}f", *vec))

# --- lexicons + dictionary -------------------------------------------------
langs = ["es", "fr", "de"]
dictionary = []
lexicons = {lang: [] for lang in langs}
used = {lang: set() for lang in langs}
for lang in langs:
    picks = rng.sample(anps, 60)
    for a, n in picks:
        surface = f"{lang}_{a}_{n}".replace("_", "-")
        pivot = f"{a} {n}"
        crowd = polarity(a, n, round(rng.uniform(-0.3, 0.3), 3))
        auto = polarity(a, n, round(rng.uniform(-0.4, 0.4), 3))
        lexicons[lang].append((lang, surface, a, n, crowd, auto))
        # ~8% of surfaces are missing from the dictionary (untranslated)
        if rng.random() > 0.08:
            dictionary.append((lang, surface, pivot))

for lang in langs:
    with open(HERE / f"lexicon_{lang}.tsv", "w") as f:
        for row in lexicons[lang]:
            lang_, surface, a, n, crowd, auto = row
            f.write(f"{lang_}\t{surface}\t{a}\t{n}\t{crowd}\t{auto}\tADJ NOUN\n")

with open(HERE / "dictionary.tsv", "w") as f:
    for lang, surface, pivot in dictionary:
        f.write(f"{lang}\t{surface}\t{pivot}\n")

# English pivot lexicon covers every ANP
with open(HERE / "lexicon_en.tsv", "w") as f:
    for a, n in anps:
        crowd = polarity(a, n, round(rng.uniform(-0.2, 0.2), 3))
        auto = polarity(a, n, round(rng.uniform(-0.3, 0.3), 3))
        f.write(f"en\t{a} {n}\t{a}\t{n}\t{crowd}\t{auto}\tADJ NOUN\n")

# --- annotations -----------------------------------------------------------
with open(HERE / "annotations.csv", "w") as f:
    for lang in langs + ["en"]:
        rows = lexicons.get(lang) or [("en", f"{a} {n}", a, n, 0, 0)
                                      for a, n in anps[:40]]
        for row in rows[:30]:
            surface = row[1]
            center = rng.choice([1, 2, 3, 4, 5])
            for w in range(5):
                rating = max(1, min(5, center + rng.choice([-1, 0, 0, 0, 1])))
                f.write(f"{lang},{surface},w{w},{rating}\n")

# --- image tags + face detections -----------------------------------------
tag_rows = []
face_rows = []
img = 0
for lang in langs + ["en"]:
    # each language tags images with pivot surfaces of its concepts
    if lang == "en":
        surfaces = [f"{a} {n}" for a, n in anps]
    else:
        surfaces = [f"{r[2]} {r[3]}" for r in lexicons[lang]]
    for _ in range(120):
        img += 1
        image_id = f"img{img:05d}"
        n_tags = rng.randint(1, 4)
        tags = sorted(set(rng.sample(surfaces, min(n_tags, len(surfaces)))))
        tag_rows.append(f"{image_id}\t{lang}\t{'|'.join(tags)}")
        w, h = 640, 480
        # face presence is biased by the first tag's adjective polarity
        a = tags[0].split()[0]
        p_face = 0.85 if polarity(a, "", 0) > 0 else 0.35
        n_faces = 0
        if rng.random() < p_face:
            n_faces = rng.choice([1, 1, 1, 2, 3])
        if n_faces == 0:
            face_rows.append(f"{image_id},{w},{h},,,,")
        for _ in range(n_faces):
            fw = rng.randint(40, 300)
            fh = rng.randint(40, 300)
            x = rng.randint(0, w - fw)
            y = rng.randint(0, h - fh)
            face_rows.append(f"{image_id},{w},{h},{x},{y},{fw},{fh}")

with open(HERE / "image_tags.tsv", "w") as f:
    f.write("\n".join(tag_rows) + "\n")
with open(HERE / "face_detections.csv", "w") as f:
    f.write("\n".join(face_rows) + "\n")

# --- corpus ----------------------------------------------------------------
with open(HERE / "corpus.txt", "w") as f:
    for _ in range(30):
        words = []
        for _ in range(rng.randint(4, 10)):
            if rng.random() < 0.3:
                a, n = rng.choice(anps)
                words += [a, n]
            else:
                words.append(rng.choice(NOUNS + ADJS + ["runs", "sun", "the"]))
        f.write(" ".join(words) + "\n")

# --- pipeline config -------------------------------------------------------
with open(HERE / "pipeline.cfg", "w") as f:
    f.write("""\
# synthetic end-to-end fixture
pivot_language = en
lexicon.en = lexicon_en.tsv
lexicon.es = lexicon_es.tsv
lexicon.fr = lexicon_fr.tsv
lexicon.de = lexicon_de.tsv
dictionary = dictionary.tsv
annotations = annotations.csv
image_tags = image_tags.tsv
face_detections = face_detections.csv
embeddings = embeddings.txt
embedding_window = 5
embedding_tokenization = words_plus_anp
corpus = corpus.txt
compose_mode = sum
scheme = one_stage
k = 12
groups = 4
seed = 42
thresholds = 0,0.1,0.2,0.3
sample_cap = 1000
portrait_threshold = 0.6
min_per_language = 5
portrait_k = 8
lang_k_min = 2
lang_k_max = 3
""")

print("fixtures written to", HERE)
