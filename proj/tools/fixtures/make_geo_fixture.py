#!/usr/bin/env python3
"""Builds the GeoQuery-style fixture: SQLite database, schema descriptor,
query-split dataset (182 test examples) and the 20-example toy dataset.

Output is deterministic. Run from the repository root:

    python3 tools/fixtures/make_geo_fixture.py
"""

import json
import os
import random
import re
import sqlite3

ROOT = os.path.normpath(os.path.join(os.path.dirname(__file__), "..", ".."))
GEO_DIR = os.path.join(ROOT, "data", "geo")
TOY_DIR = os.path.join(ROOT, "data", "toy")

# name, population (1980 census), area (sq mi), capital
STATES = [
    ("alabama", 3894000, 51705, "montgomery"),
    ("alaska", 401800, 591004, "juneau"),
    ("arizona", 2718000, 114000, "phoenix"),
    ("arkansas", 2286000, 53187, "little rock"),
    ("california", 23670000, 158706, "sacramento"),
    ("colorado", 2889000, 104091, "denver"),
    ("connecticut", 3107000, 5018, "hartford"),
    ("delaware", 594000, 2044, "dover"),
    ("florida", 9746000, 58664, "tallahassee"),
    ("georgia", 5463000, 58910, "atlanta"),
    ("hawaii", 964000, 6471, "honolulu"),
    ("idaho", 944000, 83564, "boise"),
    ("illinois", 11400000, 56345, "springfield"),
    ("indiana", 5490000, 36185, "indianapolis"),
    ("iowa", 2913000, 56275, "des moines"),
    ("kansas", 2364000, 82277, "topeka"),
    ("kentucky", 3661000, 40409, "frankfort"),
    ("louisiana", 4206000, 47752, "baton rouge"),
    ("maine", 1125000, 33265, "augusta"),
    ("maryland", 4217000, 10460, "annapolis"),
    ("massachusetts", 5737000, 8284, "boston"),
    ("michigan", 9262000, 58527, "lansing"),
    ("minnesota", 4076000, 84402, "saint paul"),
    ("mississippi", 2520000, 47689, "jackson"),
    ("missouri", 4916000, 69697, "jefferson city"),
    ("montana", 786700, 147046, "helena"),
    ("nebraska", 1569000, 77355, "lincoln"),
    ("nevada", 800500, 110561, "carson city"),
    ("new hampshire", 920600, 9279, "concord"),
    ("new jersey", 7365000, 7787, "trenton"),
    ("new mexico", 1303000, 121593, "santa fe"),
    ("new york", 17558000, 49108, "albany"),
    ("north carolina", 5882000, 52669, "raleigh"),
    ("north dakota", 652700, 70702, "bismarck"),
    ("ohio", 10800000, 41330, "columbus"),
    ("oklahoma", 3025000, 69956, "oklahoma city"),
    ("oregon", 2633000, 97073, "salem"),
    ("pennsylvania", 11863000, 45308, "harrisburg"),
    ("rhode island", 947200, 1212, "providence"),
    ("south carolina", 3122000, 31113, "columbia"),
    ("south dakota", 690767, 77116, "pierre"),
    ("tennessee", 4591000, 42144, "nashville"),
    ("texas", 14229000, 266807, "austin"),
    ("utah", 1461000, 84899, "salt lake city"),
    ("vermont", 511500, 9614, "montpelier"),
    ("virginia", 5346000, 40767, "richmond"),
    ("washington", 4113000, 68139, "olympia"),
    ("west virginia", 1950000, 24231, "charleston"),
    ("wisconsin", 4700000, 56153, "madison"),
    ("wyoming", 469557, 97809, "cheyenne"),
]

# city, state, population (non-capital large cities; capitals added below)
CITIES = [
    ("birmingham", "alabama", 284413), ("mobile", "alabama", 200452),
    ("anchorage", "alaska", 174431), ("tucson", "arizona", 330537),
    ("los angeles", "california", 2966850), ("san diego", "california", 875538),
    ("san francisco", "california", 678974), ("san jose", "california", 629442),
    ("colorado springs", "colorado", 215150), ("bridgeport", "connecticut", 142546),
    ("wilmington", "delaware", 70195), ("miami", "florida", 346865),
    ("jacksonville", "florida", 540920), ("tampa", "florida", 271523),
    ("columbus", "georgia", 169441), ("chicago", "illinois", 3005072),
    ("gary", "indiana", 151953), ("wichita", "kansas", 279272),
    ("louisville", "kentucky", 298451), ("new orleans", "louisiana", 557515),
    ("portland", "maine", 61572), ("baltimore", "maryland", 786775),
    ("worcester", "massachusetts", 161799), ("detroit", "michigan", 1203339),
    ("minneapolis", "minnesota", 370951), ("kansas city", "missouri", 448159),
    ("st. louis", "missouri", 453085), ("omaha", "nebraska", 314255),
    ("las vegas", "nevada", 164674), ("newark", "new jersey", 329248),
    ("albuquerque", "new mexico", 331767), ("new york", "new york", 7071639),
    ("buffalo", "new york", 357870), ("charlotte", "north carolina", 314447),
    ("cleveland", "ohio", 573822), ("cincinnati", "ohio", 385457),
    ("tulsa", "oklahoma", 360919), ("portland", "oregon", 366383),
    ("philadelphia", "pennsylvania", 1688210), ("pittsburgh", "pennsylvania", 423938),
    ("memphis", "tennessee", 646356), ("houston", "texas", 1595138),
    ("dallas", "texas", 904078), ("san antonio", "texas", 785880),
    ("el paso", "texas", 425259), ("norfolk", "virginia", 266979),
    ("seattle", "washington", 493846), ("spokane", "washington", 171300),
    ("milwaukee", "wisconsin", 636212), ("casper", "wyoming", 51016),
]

CAPITAL_POP = {
    "montgomery": 178157, "juneau": 19528, "phoenix": 789704,
    "little rock": 158915, "sacramento": 275741, "denver": 492365,
    "hartford": 136392, "dover": 23512, "tallahassee": 81548,
    "atlanta": 425022, "honolulu": 762874, "boise": 102249,
    "springfield": 99637, "indianapolis": 700807, "des moines": 191003,
    "topeka": 115266, "frankfort": 25973, "baton rouge": 219419,
    "augusta": 21819, "annapolis": 31740, "boston": 562994,
    "lansing": 130414, "saint paul": 270230, "jackson": 202895,
    "jefferson city": 33619, "helena": 23938, "lincoln": 171932,
    "carson city": 32022, "concord": 30400, "trenton": 92124,
    "santa fe": 48953, "albany": 101727, "raleigh": 150255,
    "bismarck": 44485, "columbus": 564871, "oklahoma city": 403213,
    "salem": 89233, "harrisburg": 53264, "providence": 156804,
    "columbia": 101208, "pierre": 11973, "nashville": 455651,
    "austin": 345496, "salt lake city": 163034, "montpelier": 8241,
    "richmond": 219214, "olympia": 27447, "charleston": 63968,
    "madison": 170616, "cheyenne": 47283,
}

# river, length (km), states traversed
RIVERS = [
    ("mississippi", 3778, ["minnesota", "wisconsin", "iowa", "illinois", "missouri",
                           "kentucky", "tennessee", "arkansas", "mississippi", "louisiana"]),
    ("missouri", 3968, ["montana", "north dakota", "south dakota", "iowa", "nebraska",
                        "missouri", "kansas"]),
    ("colorado", 2333, ["colorado", "utah", "arizona", "nevada", "california"]),
    ("ohio", 2102, ["pennsylvania", "west virginia", "kentucky", "indiana", "illinois", "ohio"]),
    ("red", 2076, ["new mexico", "texas", "oklahoma", "arkansas", "louisiana"]),
    ("arkansas", 2333, ["colorado", "kansas", "oklahoma", "arkansas"]),
    ("rio grande", 3033, ["colorado", "new mexico", "texas"]),
    ("snake", 1670, ["wyoming", "idaho", "oregon", "washington"]),
    ("columbia", 2000, ["washington", "oregon"]),
    ("tennessee", 1049, ["tennessee", "alabama", "mississippi", "kentucky"]),
    ("platte", 499, ["nebraska"]),
    ("yellowstone", 1080, ["wyoming", "montana", "north dakota"]),
    ("cumberland", 1105, ["kentucky", "tennessee"]),
    ("potomac", 462, ["west virginia", "maryland", "virginia"]),
    ("delaware", 451, ["new york", "pennsylvania", "new jersey", "delaware"]),
    ("hudson", 507, ["new york", "new jersey"]),
    ("connecticut", 655, ["new hampshire", "vermont", "massachusetts", "connecticut"]),
    ("wabash", 764, ["ohio", "indiana", "illinois"]),
    ("green", 1175, ["wyoming", "utah", "colorado"]),
    ("canadian", 1458, ["colorado", "new mexico", "texas", "oklahoma"]),
]

MOUNTAINS = [
    ("mckinley", 6194, "alaska"), ("whitney", 4418, "california"),
    ("elbert", 4399, "colorado"), ("rainier", 4392, "washington"),
    ("shasta", 4317, "california"), ("wheeler peak", 4011, "new mexico"),
    ("gannett peak", 4207, "wyoming"), ("kings peak", 4123, "utah"),
    ("granite peak", 3901, "montana"), ("borah peak", 3859, "idaho"),
    ("hood", 3424, "oregon"), ("boundary peak", 4005, "nevada"),
    ("humphreys peak", 3851, "arizona"), ("mauna kea", 4205, "hawaii"),
]

LAKES = [
    ("superior", 82362, ["michigan", "wisconsin", "minnesota"]),
    ("michigan", 58016, ["michigan", "wisconsin", "illinois", "indiana"]),
    ("huron", 59570, ["michigan"]),
    ("erie", 25667, ["new york", "pennsylvania", "ohio", "michigan"]),
    ("ontario", 19009, ["new york"]),
    ("tahoe", 497, ["california", "nevada"]),
    ("great salt lake", 4400, ["utah"]),
    ("champlain", 1127, ["vermont", "new york"]),
    ("okeechobee", 1890, ["florida"]),
    ("lake of the woods", 4350, ["minnesota"]),
]

BORDERS = {
    "alabama": ["tennessee", "georgia", "florida", "mississippi"],
    "arizona": ["california", "nevada", "utah", "new mexico", "colorado"],
    "arkansas": ["missouri", "tennessee", "mississippi", "louisiana", "texas", "oklahoma"],
    "california": ["oregon", "nevada", "arizona"],
    "colorado": ["wyoming", "nebraska", "kansas", "oklahoma", "new mexico", "arizona", "utah"],
    "connecticut": ["new york", "massachusetts", "rhode island"],
    "delaware": ["maryland", "pennsylvania", "new jersey"],
    "florida": ["georgia", "alabama"],
    "georgia": ["north carolina", "south carolina", "florida", "alabama", "tennessee"],
    "idaho": ["montana", "wyoming", "utah", "nevada", "oregon", "washington"],
    "illinois": ["wisconsin", "indiana", "kentucky", "missouri", "iowa"],
    "indiana": ["michigan", "ohio", "kentucky", "illinois"],
    "iowa": ["minnesota", "wisconsin", "illinois", "missouri", "nebraska", "south dakota"],
    "kansas": ["nebraska", "missouri", "oklahoma", "colorado"],
    "kentucky": ["indiana", "ohio", "west virginia", "virginia", "tennessee", "missouri", "illinois"],
    "louisiana": ["arkansas", "mississippi", "texas"],
    "maine": ["new hampshire"],
    "maryland": ["pennsylvania", "delaware", "virginia", "west virginia"],
    "massachusetts": ["new hampshire", "vermont", "new york", "connecticut", "rhode island"],
    "michigan": ["ohio", "indiana", "wisconsin"],
    "minnesota": ["wisconsin", "iowa", "south dakota", "north dakota"],
    "mississippi": ["tennessee", "alabama", "louisiana", "arkansas"],
    "missouri": ["iowa", "illinois", "kentucky", "tennessee", "arkansas", "oklahoma", "kansas", "nebraska"],
    "montana": ["north dakota", "south dakota", "wyoming", "idaho"],
    "nebraska": ["south dakota", "iowa", "missouri", "kansas", "colorado", "wyoming"],
    "nevada": ["idaho", "utah", "arizona", "california", "oregon"],
    "new hampshire": ["maine", "massachusetts", "vermont"],
    "new jersey": ["new york", "delaware", "pennsylvania"],
    "new mexico": ["colorado", "oklahoma", "texas", "arizona"],
    "new york": ["vermont", "massachusetts", "connecticut", "new jersey", "pennsylvania"],
    "north carolina": ["virginia", "south carolina", "georgia", "tennessee"],
    "north dakota": ["minnesota", "south dakota", "montana"],
    "ohio": ["michigan", "pennsylvania", "west virginia", "kentucky", "indiana"],
    "oklahoma": ["kansas", "missouri", "arkansas", "texas", "new mexico", "colorado"],
    "oregon": ["washington", "idaho", "nevada", "california"],
    "pennsylvania": ["new york", "new jersey", "delaware", "maryland", "west virginia", "ohio"],
    "rhode island": ["massachusetts", "connecticut"],
    "south carolina": ["north carolina", "georgia"],
    "south dakota": ["north dakota", "minnesota", "iowa", "nebraska", "wyoming", "montana"],
    "tennessee": ["kentucky", "virginia", "north carolina", "georgia", "alabama", "mississippi",
                  "arkansas", "missouri"],
    "texas": ["oklahoma", "arkansas", "louisiana", "new mexico"],
    "utah": ["idaho", "wyoming", "colorado", "arizona", "nevada"],
    "vermont": ["new york", "new hampshire", "massachusetts"],
    "virginia": ["maryland", "north carolina", "tennessee", "kentucky", "west virginia"],
    "washington": ["idaho", "oregon"],
    "west virginia": ["ohio", "pennsylvania", "maryland", "virginia", "kentucky"],
    "wisconsin": ["michigan", "minnesota", "iowa", "illinois"],
    "wyoming": ["montana", "south dakota", "nebraska", "colorado", "utah", "idaho"],
}


def highlow_rows():
    rng = random.Random(7)
    mountain_by_state = {m[2]: m for m in MOUNTAINS}
    rows = []
    for name, _, _, _ in STATES:
        if name in mountain_by_state:
            peak, alt, _ = mountain_by_state[name]
        else:
            peak = f"{name.split()[-1]} summit"
            alt = rng.randint(240, 2400)
        low, low_elev = ("death valley", -86) if name == "california" else (
            ("new orleans", -2) if name == "louisiana" else (f"{name.split()[-1]} lowland", rng.randint(0, 300)))
        rows.append((name, alt, low, peak, low_elev))
    return rows


def build_database(path):
    if os.path.exists(path):
        os.remove(path)
    db = sqlite3.connect(path)
    db.executescript(
        """
        CREATE TABLE state (state_name TEXT PRIMARY KEY, population INTEGER, area REAL,
                            country_name TEXT, capital TEXT, density REAL);
        CREATE TABLE city (city_name TEXT, population INTEGER, country_name TEXT, state_name TEXT);
        CREATE TABLE river (river_name TEXT, length INTEGER, country_name TEXT, traverse TEXT);
        CREATE TABLE lake (lake_name TEXT, area REAL, country_name TEXT, state_name TEXT);
        CREATE TABLE mountain (mountain_name TEXT, mountain_altitude INTEGER, country_name TEXT,
                               state_name TEXT);
        CREATE TABLE border_info (state_name TEXT, border TEXT);
        CREATE TABLE highlow (state_name TEXT, highest_elevation INTEGER, lowest_point TEXT,
                              highest_point TEXT, lowest_elevation INTEGER);
        """
    )
    for name, pop, area, capital in STATES:
        db.execute("INSERT INTO state VALUES (?,?,?,?,?,?)",
                   (name, pop, float(area), "usa", capital, round(pop / area, 4)))
    for name, _, _, capital in STATES:
        db.execute("INSERT INTO city VALUES (?,?,?,?)", (capital, CAPITAL_POP[capital], "usa", name))
    for city, state, pop in CITIES:
        db.execute("INSERT INTO city VALUES (?,?,?,?)", (city, pop, "usa", state))
    for river, length, states in RIVERS:
        for s in states:
            db.execute("INSERT INTO river VALUES (?,?,?,?)", (river, length, "usa", s))
    for lake, area, states in LAKES:
        for s in states:
            db.execute("INSERT INTO lake VALUES (?,?,?,?)", (lake, float(area), "usa", s))
    for mountain, alt, state in MOUNTAINS:
        db.execute("INSERT INTO mountain VALUES (?,?,?,?)", (mountain, alt, "usa", state))
    for state, borders in BORDERS.items():
        for b in borders:
            db.execute("INSERT INTO border_info VALUES (?,?)", (state, b))
    for row in highlow_rows():
        db.execute("INSERT INTO highlow VALUES (?,?,?,?,?)", row)
    db.commit()
    db.execute("VACUUM")
    db.close()


SCHEMA = {
    "db_path": "geo.sqlite",
    "tables": [
        {"name": "state",
         "columns": [{"name": "state_name", "type": "text"}, {"name": "population", "type": "int"},
                     {"name": "area", "type": "double"}, {"name": "country_name", "type": "text"},
                     {"name": "capital", "type": "text"}, {"name": "density", "type": "double"}],
         "foreign_keys": []},
        {"name": "city",
         "columns": [{"name": "city_name", "type": "text"}, {"name": "population", "type": "int"},
                     {"name": "country_name", "type": "text"}, {"name": "state_name", "type": "text"}],
         "foreign_keys": [{"column": "state_name", "ref_table": "state", "ref_column": "state_name"}]},
        {"name": "river",
         "columns": [{"name": "river_name", "type": "text"}, {"name": "length", "type": "int"},
                     {"name": "country_name", "type": "text"}, {"name": "traverse", "type": "text"}],
         "foreign_keys": [{"column": "traverse", "ref_table": "state", "ref_column": "state_name"}]},
        {"name": "lake",
         "columns": [{"name": "lake_name", "type": "text"}, {"name": "area", "type": "double"},
                     {"name": "country_name", "type": "text"}, {"name": "state_name", "type": "text"}],
         "foreign_keys": [{"column": "state_name", "ref_table": "state", "ref_column": "state_name"}]},
        {"name": "mountain",
         "columns": [{"name": "mountain_name", "type": "text"}, {"name": "mountain_altitude", "type": "int"},
                     {"name": "country_name", "type": "text"}, {"name": "state_name", "type": "text"}],
         "foreign_keys": [{"column": "state_name", "ref_table": "state", "ref_column": "state_name"}]},
        {"name": "border_info",
         "columns": [{"name": "state_name", "type": "text"}, {"name": "border", "type": "text"}],
         "foreign_keys": [{"column": "state_name", "ref_table": "state", "ref_column": "state_name"},
                          {"column": "border", "ref_table": "state", "ref_column": "state_name"}]},
        {"name": "highlow",
         "columns": [{"name": "state_name", "type": "text"}, {"name": "highest_elevation", "type": "int"},
                     {"name": "lowest_point", "type": "text"}, {"name": "highest_point", "type": "text"},
                     {"name": "lowest_elevation", "type": "int"}],
         "foreign_keys": [{"column": "state_name", "ref_table": "state", "ref_column": "state_name"}]},
    ],
}

STATE_NAMES = [s[0] for s in STATES]
CITY_NAMES = sorted({c[0] for c in CITIES if c[0] not in {s[3] for s in STATES}})
CAPITALS = [s[3] for s in STATES]
RIVER_NAMES = [r[0] for r in RIVERS]
MOUNTAIN_NAMES = [m[0] for m in MOUNTAINS]
LAKE_NAMES = [lk[0] for lk in LAKES]
BIG_NUMBERS = [100000, 150000, 200000, 250000, 300000, 500000, 1000000, 2000000, 5000000, 10000000]
AREAS = [10000, 20000, 50000, 80000, 100000, 150000]
LENGTHS = [500, 750, 1000, 1500, 2000, 2500, 3000]

# (key, slot, nl patterns, sql pattern). The slot fills both {x} placeholders.
TEMPLATES = [
    ("state_population", "state",
     ["what can you tell me about the population of {x}", "what is the population of {x}",
      "how many people live in {x}", "how many citizens in {x}", "what is the number of people in {x}"],
     "SELECT population FROM state WHERE state_name = '{x}'"),
    ("state_capital", "state",
     ["what is the capital of {x}", "what is the capital city of {x}", "which city is the capital of {x}"],
     "SELECT capital FROM state WHERE state_name = '{x}'"),
    ("state_area", "state",
     ["what is the area of {x}", "how large is {x}", "how big is {x}", "what is the size of {x}"],
     "SELECT area FROM state WHERE state_name = '{x}'"),
    ("state_density", "state",
     ["what is the population density of {x}", "what is the density of {x}",
      "how dense is the population of {x}"],
     "SELECT density FROM state WHERE state_name = '{x}'"),
    ("border_count", "state",
     ["how many states border {x}", "how many states are next to {x}",
      "what is the number of neighboring states for {x}"],
     "SELECT COUNT(*) FROM border_info WHERE state_name = '{x}'"),
    ("border_list", "state",
     ["what states border {x}", "which states border {x}", "name the states which neighbor {x}",
      "what are the neighboring states for {x}"],
     "SELECT border FROM border_info WHERE state_name = '{x}'"),
    ("state_cities", "state",
     ["what cities are in {x}", "name the cities in {x}", "what are the cities of {x}",
      "which cities are located in {x}"],
     "SELECT city_name FROM city WHERE state_name = '{x}'"),
    ("largest_city_in_state", "state",
     ["what is the largest city in {x}", "what is the biggest city in {x}",
      "which city in {x} has the most people"],
     "SELECT city_name FROM city WHERE state_name = '{x}' ORDER BY population DESC LIMIT 1"),
    ("city_count_in_state", "state",
     ["how many cities are there in {x}", "how many cities does {x} have", "count the cities in {x}"],
     "SELECT COUNT(*) FROM city WHERE state_name = '{x}'"),
    ("rivers_in_state", "state",
     ["what rivers flow through {x}", "which rivers run through {x}", "what rivers are in {x}",
      "name the rivers in {x}"],
     "SELECT river_name FROM river WHERE traverse = '{x}'"),
    ("river_count_in_state", "state",
     ["how many rivers are in {x}", "how many rivers run through {x}", "how many rivers does {x} have"],
     "SELECT COUNT(*) FROM river WHERE traverse = '{x}'"),
    ("river_length", "river",
     ["how long is the {x} river", "what is the length of the {x} river", "how long is the {x}"],
     "SELECT length FROM river WHERE river_name = '{x}'"),
    ("river_states", "river",
     ["what states does the {x} river run through", "which states does the {x} flow through",
      "through which states does the {x} river go"],
     "SELECT traverse FROM river WHERE river_name = '{x}'"),
    ("river_state_count", "river",
     ["how many states does the {x} river flow through", "how many states does the {x} run through"],
     "SELECT COUNT(DISTINCT traverse) FROM river WHERE river_name = '{x}'"),
    ("city_population", "city",
     ["what is the population of {x}", "how many people live in {x}", "how big is {x}",
      "how many inhabitants does {x} have"],
     "SELECT population FROM city WHERE city_name = '{x}'"),
    ("city_state", "city",
     ["what state is {x} in", "which state is {x} located in", "in which state is {x}"],
     "SELECT state_name FROM city WHERE city_name = '{x}'"),
    ("highest_point_of_state", "state",
     ["what is the highest point in {x}", "what is the tallest point in {x}",
      "where is the highest point in {x}"],
     "SELECT highest_point FROM highlow WHERE state_name = '{x}'"),
    ("lowest_point_of_state", "state",
     ["what is the lowest point in {x}", "where is the lowest spot in {x}"],
     "SELECT lowest_point FROM highlow WHERE state_name = '{x}'"),
    ("highest_elevation_of_state", "state",
     ["how high is the highest point in {x}", "what is the highest elevation in {x}"],
     "SELECT highest_elevation FROM highlow WHERE state_name = '{x}'"),
    ("state_of_capital", "capital",
     ["which state has {x} as its capital", "{x} is the capital of which state",
      "what state has the capital {x}"],
     "SELECT state_name FROM state WHERE capital = '{x}'"),
    ("mountains_in_state", "state",
     ["what mountains are in {x}", "name the mountains in {x}"],
     "SELECT mountain_name FROM mountain WHERE state_name = '{x}'"),
    ("mountain_altitude", "mountain",
     ["how high is mount {x}", "what is the height of mount {x}", "how tall is {x}"],
     "SELECT mountain_altitude FROM mountain WHERE mountain_name = '{x}'"),
    ("lakes_in_state", "state",
     ["what lakes are in {x}", "name the lakes in {x}", "which lakes are located in {x}"],
     "SELECT lake_name FROM lake WHERE state_name = '{x}'"),
    ("lake_area", "lake",
     ["what is the area of lake {x}", "how large is lake {x}", "how big is {x} lake"],
     "SELECT area FROM lake WHERE lake_name = '{x}'"),
    ("states_pop_over", "bignum",
     ["which states have a population greater than {x}", "what states have more than {x} people",
      "name the states with over {x} inhabitants"],
     "SELECT state_name FROM state WHERE population > {x}"),
    ("cities_pop_over", "bignum",
     ["what cities have more than {x} people", "which cities have a population over {x}",
      "list the cities with a population larger than {x}"],
     "SELECT city_name FROM city WHERE population > {x}"),
    ("count_states_pop_over", "bignum",
     ["how many states have a population greater than {x}", "how many states have more than {x} people"],
     "SELECT COUNT(*) FROM state WHERE population > {x}"),
    ("states_area_over", "area",
     ["which states have an area larger than {x} square miles", "what states are bigger than {x} square miles"],
     "SELECT state_name FROM state WHERE area > {x}"),
    ("rivers_longer_than", "length",
     ["which rivers are longer than {x} km", "what rivers are over {x} kilometers long",
      "name the rivers with a length above {x}"],
     "SELECT river_name FROM river WHERE length > {x}"),
    ("capital_population", "state",
     ["what is the population of the capital of {x}", "how many people live in the capital of {x}",
      "how big is the capital of {x}"],
     "SELECT population FROM city WHERE city_name = (SELECT capital FROM state WHERE state_name = '{x}')"),
    ("sum_city_pop", "state",
     ["what is the combined population of all cities in {x}",
      "how many people live in the cities of {x} in total"],
     "SELECT SUM(population) FROM city WHERE state_name = '{x}'"),
    ("avg_city_pop", "state",
     ["what is the average population of the cities in {x}", "what is the average city size in {x}"],
     "SELECT AVG(population) FROM city WHERE state_name = '{x}'"),
    ("border_of_border", "state",
     ["what states border states that border {x}", "which states neighbor the neighbors of {x}"],
     "SELECT border FROM border_info WHERE state_name IN (SELECT border FROM border_info WHERE state_name = '{x}')"),
    ("rivers_in_neighbors", "state",
     ["what rivers flow through states that border {x}", "which rivers are in the neighboring states of {x}"],
     "SELECT river_name FROM river WHERE traverse IN (SELECT border FROM border_info WHERE state_name = '{x}')"),
    ("largest_state", None,
     ["what is the largest state", "which state has the largest area", "what is the biggest state in the usa",
      "name the state with the greatest area"],
     "SELECT state_name FROM state ORDER BY area DESC LIMIT 1"),
    ("most_populous_state", None,
     ["what state has the largest population", "which state has the most people",
      "what is the most populous state", "what state has the most inhabitants"],
     "SELECT state_name FROM state ORDER BY population DESC LIMIT 1"),
    ("smallest_state", None,
     ["what is the smallest state", "which state has the smallest area", "what is the smallest state in the usa"],
     "SELECT state_name FROM state ORDER BY area ASC LIMIT 1"),
    ("longest_river", None,
     ["what is the longest river", "which river is the longest", "what is the longest river in the usa",
      "name the longest river in the us"],
     "SELECT river_name FROM river ORDER BY length DESC LIMIT 1"),
    ("largest_city", None,
     ["what is the largest city in the usa", "which city has the most people", "what is the biggest city",
      "what city has the largest population"],
     "SELECT city_name FROM city ORDER BY population DESC LIMIT 1"),
    ("highest_mountain", None,
     ["what is the highest mountain", "which mountain is the tallest", "what is the tallest mountain in the us",
      "name the highest mountain in america"],
     "SELECT mountain_name FROM mountain ORDER BY mountain_altitude DESC LIMIT 1"),
    ("state_count", None,
     ["how many states are there", "how many states are in the usa", "how many states does the usa have"],
     "SELECT COUNT(*) FROM state"),
    ("total_area", None,
     ["what is the combined area of all states", "what is the total area of the usa"],
     "SELECT SUM(area) FROM state"),
    ("highest_state", None,
     ["which state has the highest elevation", "what state has the highest point",
      "in which state is the highest point in the country"],
     "SELECT state_name FROM highlow ORDER BY highest_elevation DESC LIMIT 1"),
    ("densest_state", None,
     ["what state has the highest population density", "which state is the most densely populated",
      "what is the most dense state"],
     "SELECT state_name FROM state ORDER BY density DESC LIMIT 1"),
    ("river_count", None,
     ["how many rivers are there", "how many rivers are in the usa", "how many rivers are there in the us"],
     "SELECT COUNT(DISTINCT river_name) FROM river"),
    ("isolated_states", None,
     ["which states border no other states", "what states have no neighbors"],
     "SELECT state_name FROM state WHERE state_name NOT IN (SELECT state_name FROM border_info)"),
    ("avg_state_pop", None,
     ["what is the average population of the states", "what is the average population per state"],
     "SELECT AVG(population) FROM state"),
    ("states_by_population", None,
     ["list the states in order of population", "rank all states by population"],
     "SELECT state_name FROM state ORDER BY population DESC"),
    ("capital_of_largest_state", None,
     ["what is the capital of the largest state", "what is the capital of the state with the largest area"],
     "SELECT capital FROM state WHERE area = (SELECT MAX(area) FROM state)"),
    ("largest_capital", None,
     ["which capital has the most people", "what is the largest capital city"],
     "SELECT city_name FROM city WHERE city_name IN (SELECT capital FROM state) ORDER BY population DESC LIMIT 1"),
]

SLOT_VALUES = {
    "state": STATE_NAMES, "river": RIVER_NAMES, "city": CITY_NAMES, "capital": CAPITALS,
    "mountain": MOUNTAIN_NAMES, "lake": LAKE_NAMES, "bignum": [str(n) for n in BIG_NUMBERS],
    "area": [str(a) for a in AREAS], "length": [str(n) for n in LENGTHS],
}

TEST_TEMPLATES = [
    "state_population", "border_count", "largest_city_in_state", "rivers_in_state", "river_length",
    "city_state", "highest_point_of_state", "state_of_capital", "lake_area", "states_pop_over",
    "rivers_longer_than", "capital_population", "border_of_border", "largest_state", "longest_river",
    "highest_mountain", "state_count", "densest_state", "isolated_states", "capital_of_largest_state",
]
DEV_TEMPLATES = ["mountain_altitude", "lowest_point_of_state", "sum_city_pop", "total_area",
                 "avg_state_pop", "largest_capital"]
# Remaining templates form the train split.

SPLIT_SIZES = {"test": 182, "dev": 24, "train": 200}


def expand(template, count, rng):
    key, slot, nls, sql = template
    out = []
    if slot is None:
        for nl in nls[:count]:
            out.append((nl, sql))
        return out
    values = list(SLOT_VALUES[slot])
    rng.shuffle(values)
    if key == "state_population":
        values.remove("missouri")
        values.insert(0, "missouri")
    seen = set()
    i = 0
    while len(out) < count and i < len(values) * len(nls):
        value = values[i % len(values)]
        nl = nls[i % len(nls)].format(x=value)
        i += 1
        if nl in seen:
            continue
        seen.add(nl)
        out.append((nl, sql.format(x=value)))
    return out


def allocate(templates, total):
    """Spreads `total` examples over templates; slot-free templates give at most len(nls)."""
    caps = []
    for _, slot, nls, _ in templates:
        caps.append(len(nls) if slot is None else 10**6)
    counts = [0] * len(templates)
    remaining = total
    while remaining > 0:
        progressed = False
        for i in range(len(templates)):
            if remaining == 0:
                break
            if counts[i] < caps[i]:
                counts[i] += 1
                remaining -= 1
                progressed = True
        if not progressed:
            raise SystemExit("not enough capacity")
    return counts


def build_split(name, keys, rng):
    templates = [t for t in TEMPLATES if t[0] in keys]
    counts = allocate(templates, SPLIT_SIZES[name])
    pairs = []
    for template, count in zip(templates, counts):
        pairs.extend(expand(template, count, rng))
    if name == "test":
        first = pairs.index(("what can you tell me about the population of missouri",
                             "SELECT population FROM state WHERE state_name = 'missouri'"))
        pairs.insert(0, pairs.pop(first))
    return pairs


def main():
    os.makedirs(GEO_DIR, exist_ok=True)
    os.makedirs(TOY_DIR, exist_ok=True)
    build_database(os.path.join(GEO_DIR, "geo.sqlite"))
    with open(os.path.join(GEO_DIR, "schema.json"), "w") as f:
        json.dump(SCHEMA, f, indent=2)
        f.write("\n")

    rng = random.Random(2022)
    test_keys = set(TEST_TEMPLATES)
    dev_keys = set(DEV_TEMPLATES)
    train_keys = {t[0] for t in TEMPLATES} - test_keys - dev_keys
    splits = {
        "train": build_split("train", train_keys, rng),
        "dev": build_split("dev", dev_keys, rng),
        "test": build_split("test", test_keys, rng),
    }
    records = []
    for split in ("train", "dev", "test"):
        for i, (nl, sql) in enumerate(splits[split]):
            records.append({"id": f"geo-{split}-{i:03d}", "nl": nl, "sql": sql, "split": split})
    with open(os.path.join(GEO_DIR, "geoquery.jsonl"), "w") as f:
        for r in records:
            f.write(json.dumps(r) + "\n")

    # Toy dataset: 20 examples drawn from the fixture, still a valid query split.
    toy = []
    picks = {"train": 10, "dev": 2, "test": 8}
    for split, n in picks.items():
        pool = [r for r in records if r["split"] == split]
        step = max(1, len(pool) // n)
        chosen = pool[::step][:n]
        if split == "test":
            chosen[0] = pool[0]
        for i, r in enumerate(chosen):
            toy.append({"id": f"toy-{split}-{i:02d}", "nl": r["nl"], "sql": r["sql"], "split": split})
    with open(os.path.join(TOY_DIR, "toy.jsonl"), "w") as f:
        for r in toy:
            f.write(json.dumps(r) + "\n")
    toy_schema = dict(SCHEMA)
    toy_schema["db_path"] = "../geo/geo.sqlite"
    with open(os.path.join(TOY_DIR, "schema.json"), "w") as f:
        json.dump(toy_schema, f, indent=2)
        f.write("\n")

    # Every gold query must execute.
    db = sqlite3.connect(os.path.join(GEO_DIR, "geo.sqlite"))
    for r in records:
        db.execute(r["sql"]).fetchall()
    db.close()
    counts = {s: sum(1 for r in records if r["split"] == s) for s in ("train", "dev", "test")}
    print("wrote", counts, "toy", len(toy))


if __name__ == "__main__":
    main()
