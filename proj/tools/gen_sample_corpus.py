#!/usr/bin/env python3
"""Generate the synthetic sample corpora under data/.

The instructions are synthetic stand-ins built from templates. They are not
the original benchmark prompts. Output is deterministic for a given seed.
"""
import argparse
import json
import random
from pathlib import Path

CATEGORIES = {
    "celebratory milestones": {
        "heads": ["Happy 50th Birthday", "Congratulations Class of 2024", "Happy Anniversary Mom and Dad",
                  "Welcome Baby Olivia", "Happy Retirement Frank", "Just Married"],
        "tails": ["thank you for fifty wonderful years", "the adventure begins today",
                  "cheers to many more sunny summers together", "with love from all of us at home",
                  "party starts at seven in the garden"],
        "scenes": ["a frosted layer cake on a wooden table", "a confetti covered banner above a doorway",
                   "a bundle of helium balloons in a bright living room", "a greeting card lying on white linen"],
    },
    "futuristic adventures": {
        "heads": ["Mission Control Orion Seven", "Welcome to Mars Colony", "Hyperloop Station Zero",
                  "Warp Drive Engaged", "Galactic Trade Hub", "Cryo Bay Three"],
        "tails": ["all crew report to the observation deck", "oxygen levels nominal in every sector",
                  "next departure to Titan in four hours", "authorized androids only beyond this gate",
                  "please secure loose objects before launch"],
        "scenes": ["a holographic sign floating over a chrome corridor", "the hull of a silver starship",
                   "a neon display inside a space station", "a glowing console on a lunar rover"],
    },
    "urban life": {
        "heads": ["Fifth Avenue Deli", "Night Market Open Late", "No Parking Tow Away Zone",
                  "Downtown Loft For Rent", "Metro Line 4 Uptown", "Fresh Bagels Daily"],
        "tails": ["best coffee on the block since 1987", "cash only after midnight", "ask about our weekend specials",
                  "mind the gap between the train and the platform", "open seven days a week"],
        "scenes": ["a shop window on a rainy city street", "a painted brick wall in a busy alley",
                   "a subway platform sign under fluorescent light", "a food truck parked at a crowded corner"],
    },
    "cozy settings": {
        "heads": ["Home Sweet Home", "Hot Cocoa Bar", "Reading Nook", "Fireside Tales",
                  "Grandma's Kitchen", "Blankets and Books"],
        "tails": ["kick off your shoes and stay a while", "marshmallows are on the top shelf",
                  "quiet please a good story is in progress", "warm bread served every sunday morning",
                  "the kettle is always on"],
        "scenes": ["an embroidered pillow on a knitted armchair", "a chalkboard beside a crackling fireplace",
                   "a wooden sign hanging in a snowy cabin", "a ceramic mug on a windowsill with fairy lights"],
    },
    "inspirational messages": {
        "heads": ["Dream Big", "Never Give Up", "Be the Change", "Stay Curious", "Believe in Yourself",
                  "One Step at a Time"],
        "tails": ["every journey begins with a single step", "the best time to start is now",
                  "small progress is still progress", "kindness costs nothing and means everything",
                  "your only limit is your mind"],
        "scenes": ["a motivational poster on a gym wall", "a handwritten note taped to a mirror",
                   "a sunrise over mountains with bold lettering", "a painted mural in a school hallway"],
    },
    "historical themes": {
        "heads": ["Anno Domini 1492", "The Great Library", "Royal Mail Coach", "Gold Rush Saloon",
                  "Victory Day 1945", "Ye Olde Tavern"],
        "tails": ["established in the year of our lord 1620", "by order of the king all travelers must register",
                  "fresh telegrams delivered at noon", "the last stagecoach leaves at dusk",
                  "here stood the first printing press in town"],
        "scenes": ["a weathered parchment scroll", "a carved stone plaque on an old castle wall",
                   "a sepia photograph of a frontier storefront", "a brass plate on a museum exhibit"],
    },
    "cultural celebrations": {
        "heads": ["Happy Lunar New Year", "Feliz Dia de los Muertos", "Happy Diwali", "Oktoberfest 2024",
                  "Carnival Parade", "Eid Mubarak"],
        "tails": ["lanterns light the river at nine", "family dinner at grandma's house",
                  "music and dancing until sunrise", "sweets and fireworks for everyone",
                  "join the parade on main street"],
        "scenes": ["a red paper lantern glowing at night", "a decorated altar with marigolds",
                   "a festival banner strung across a plaza", "a tray of sweets with a golden card"],
    },
    "natural landscapes": {
        "heads": ["Yosemite Valley", "Welcome to Glacier Point", "Trailhead 2.4 Miles", "Sunset Beach",
                  "Redwood Forest Preserve", "Eagle Lake"],
        "tails": ["please stay on the marked trail", "elevation 7214 feet above sea level",
                  "leave nothing but footprints", "bears are active in this area",
                  "no swimming beyond this point"],
        "scenes": ["a carved wooden trail marker in a pine forest", "a painted sign on a sandy beach",
                   "a metal placard at a misty overlook", "a rustic post beside a mountain lake"],
    },
    "educational environments": {
        "heads": ["Chemistry Lab 204", "Library Quiet Zone", "Welcome Back Students", "Math Club Meeting",
                  "Science Fair Winners", "Room 12 Kindergarten"],
        "tails": ["safety goggles required at all times", "exams begin monday at nine",
                  "solve for x and show your work", "please return books to the front desk",
                  "field trip forms due friday"],
        "scenes": ["a chalkboard in a sunlit classroom", "a bulletin board covered in paper stars",
                   "a laminated sign on a laboratory door", "a whiteboard in a lecture hall"],
    },
    "artistic expressions": {
        "heads": ["Art Is Freedom", "Gallery Opening Tonight", "Color Outside the Lines", "Street Art Festival",
                  "Abstract Dreams", "The Painted Word"],
        "tails": ["every canvas tells a story", "meet the artists at eight in studio b",
                  "paint drips are part of the plan", "sculpture garden closes at dusk",
                  "create something beautiful today"],
        "scenes": ["a splattered canvas on an easel", "graffiti lettering on a concrete wall",
                   "a watercolor poster in a gallery window", "a neon art installation in a dark room"],
    },
    "practical text": {
        "heads": ["1600 Pennsylvania Ave NW", "Call 555-0199", "NASA JPL", "Gate B27",
                  "Exit 42 Route 9", "Wi-Fi Password guest2024"],
        "tails": ["open mon to fri 9am to 5pm", "suite 300 second floor", "est. 1998",
                  "zip code 94107", "pin 4471 expires 12/31"],
        "scenes": ["a company logo on a glass office door", "an address plate beside a front door",
                   "a highway sign at dusk", "a printed label on a cardboard box"],
    },
}

STYLES = ["bold sans serif", "elegant gold script", "hand-drawn chalk lettering", "retro neon tubes",
          "embossed serif capitals", "playful bubble letters", "distressed stencil", "minimal thin font",
          "watercolor brush script", "pixel art font"]

OPENERS = ["A photo of", "An illustration of", "A detailed render of", "A close-up shot of",
           "A vintage print of", "A cinematic view of"]

CLOSERS = ["soft morning light and shallow depth of field", "warm colors and a cheerful mood",
           "high contrast and crisp detail", "muted pastel tones", "dramatic shadows and rich texture"]

# Generic vocabulary for the length-stratified corpus.
VOCAB = ("sun river stone open door light green city market fresh bread north road music paper "
         "garden winter summer bright quiet table window silver harbor mountain coffee station "
         "letter story happy early night forest ocean friend house street bridge lamp cloud field "
         "school dream morning golden little bold simple welcome travel journey home warm cold").split()


def quote_for(rng, spec):
    head = rng.choice(spec["heads"])
    mode = rng.random()
    if mode < 0.25:
        return head
    if mode < 0.75:
        return f"{head} {rng.choice(spec['tails'])}"
    a, b = rng.sample(spec["tails"], 2)
    return f"{head} {a} {b}"


def instruction_for(rng, spec, quote):
    style = rng.choice(STYLES)
    return (f"{rng.choice(OPENERS)} {rng.choice(spec['scenes'])}, with the text \"{quote}\" "
            f"written in {style}, {rng.choice(CLOSERS)}"), style


def sample_corpus(seed, n):
    rng = random.Random(seed)
    names = sorted(CATEGORIES)
    seen = set()
    items = []
    i = 0
    while len(items) < n:
        category = names[i % len(names)]
        i += 1
        spec = CATEGORIES[category]
        quote = quote_for(rng, spec)
        if quote in seen:
            continue
        seen.add(quote)
        text, style = instruction_for(rng, spec, quote)
        items.append({"id": f"syn-{len(items) + 1:03d}", "instruction": text, "quote": quote,
                      "category": category, "style": style, "synthetic": True})
    return items


def length_corpus(seed, per_length, lo, hi):
    rng = random.Random(seed)
    items = []
    for words in range(lo, hi + 1):
        for k in range(per_length):
            quote = " ".join(rng.choice(VOCAB) for _ in range(words))
            items.append({"id": f"len-{words:02d}-{k}", "instruction": f"A poster with the text \"{quote}\"",
                          "quote": quote, "category": "length-stratified", "style": "plain",
                          "synthetic": True})
    return items


def write(path, items):
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item, ensure_ascii=False) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write(args.out_dir / "typeinst_sample.jsonl", sample_corpus(args.seed, 118))
    write(args.out_dir / "length_stratified.jsonl", length_corpus(args.seed + 1, 40, 2, 30))


if __name__ == "__main__":
    main()
