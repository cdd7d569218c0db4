#!/usr/bin/env python3
"""Regenerate the bundled toy data under data/toy/ and data/rhyme/.

The toy corpus is synthetic: sentences are composed from a small classical
vocabulary and shaped after ten well-known rhythmics. Each sentence ships with
a nested-array tree whose leaves are the vocabulary words, so the curation
stage can run without an external parser.

Usage: python3 scripts/make_toy_data.py [--seed 20221215] [--paragraphs 30]
Requires pypinyin for the rhyme table.
"""

import argparse
import json
import os
import random

RHYTHMICS = {
    "如梦令": [(6, "c"), (6, "p"), (5, "c"), (6, "p"), (2, "c"), (2, "p"), (6, "p")],
    "浣溪沙": [(7, "c"), (7, "p"), (7, "p"), (7, "c"), (7, "p"), (7, "p")],
    "卜算子": [(5, "c"), (5, "p"), (7, "c"), (5, "p")] * 2,
    "相见欢": [(6, "c"), (3, "p"), (9, "p"), (3, "c"), (3, "c"), (3, "p"), (9, "p")],
    "长相思": [(3, "c"), (3, "c"), (7, "c"), (5, "p")] * 2,
    "清平乐": [(4, "c"), (5, "p"), (7, "c"), (6, "p"), (6, "c"), (6, "p"), (6, "c"), (6, "p")],
    "菩萨蛮": [(7, "c"), (7, "p"), (5, "c"), (5, "p"), (5, "c"), (5, "p"), (5, "c"), (5, "p")],
    "忆江南": [(3, "c"), (5, "p"), (7, "c"), (7, "p"), (5, "p")],
    "蝶恋花": [(7, "c"), (4, "c"), (5, "p"), (7, "c"), (7, "p")] * 2,
    "渔歌子": [(7, "c"), (7, "p"), (3, "c"), (3, "c"), (7, "p")],
}

AUTHORS = ["无名氏", "柳永", "晏殊", "秦观", "周邦彦", "李清照", "姜夔", ""]

NOUNS2 = """明月 清风 孤舟 落花 流水 青山 白云 斜阳 西楼 长亭 芳草 杨柳 梧桐 秋霜
春雨 东风 归雁 残灯 画楼 小园 香径 烟波 江南 故人 天涯 红豆 玉阶 罗衣 锦书 琵琶
黄昏 寒蝉 夜雨 孤灯 远山 疏影 暗香 秋水 春山 玉楼 帘幕 阑干 庭院 花影 月色 钟声
渔火 兰舟 碧空 沧波 关山 乡梦 旧游 离愁 清秋 新词 流光 芳菲 烟柳 霜天 晚风 江楼
短亭 孤城 鸳鸯 燕子 海棠 梨花 桃花 荷香 菱歌 晓镜 罗帐 银烛 金樽 玉箫 画船 山河
""".split()

VERBS1 = list("照落飞听望倚醉梦归送别忆寄问看度凝愁惜怜隔随绕入")
ADJS1 = list("寒轻淡远深残清孤冷暗空疏小长微")
NOUNS1 = list("风雨月花云山水烟霜雪灯梦舟楼柳酒泪")
ADVS1 = list("又还更犹独自空休莫且")
WORDS3 = """杏花雨 杨柳风 芭蕉雨 桂花香 相思意 凭栏处 断肠人 黄花瘦 天涯路 故园情
""".split()

# Sentence-final characters, grouped by rhyme so each paragraph can keep one.
RHYME_FINALS = {
    "江阳": list("长香霜光凉乡阳忙伤茫窗"),
    "言前": list("天年烟边残寒山还闲眠间"),
    "人辰": list("人春深云心魂痕尘门新"),
    "中东": list("中风东红空声情明生城程"),
    "油求": list("秋愁楼舟流留休头收柔"),
    "一七": list("衣时知池迟啼丝西离依"),
    "遥条": list("朝桥潮消遥箫飘梢宵"),
    "灰堆": list("归飞回杯随垂吹微"),
}


def word_pool(rng):
    kind = rng.random()
    if kind < 0.55:
        return rng.choice(NOUNS2)
    if kind < 0.70:
        return rng.choice(VERBS1)
    if kind < 0.82:
        return rng.choice(ADJS1)
    if kind < 0.92:
        return rng.choice(NOUNS1)
    return rng.choice(ADVS1)


def compose(rng, length, final_char):
    """Return a list of words whose concatenation has exactly `length` chars."""
    words = []
    remaining = length - (1 if final_char else 0)
    while remaining > 0:
        if remaining >= 3 and rng.random() < 0.07:
            w = rng.choice(WORDS3)
        else:
            w = word_pool(rng)
        if len(w) > remaining:
            w = rng.choice(NOUNS1 + VERBS1 + ADJS1)
        words.append(w)
        remaining -= len(w)
    if final_char:
        words.append(final_char)
    return words


def bracket(rng, words):
    """Random binary-ish bracketing over words; leaves are strings."""
    if len(words) == 1:
        return words[0]
    if len(words) == 2 and rng.random() < 0.5:
        return [words[0], words[1]]
    cut = rng.randint(1, len(words) - 1)
    left = bracket(rng, words[:cut])
    right = bracket(rng, words[cut:])
    children = []
    for part in (left, right):
        # Flatten single-child arrays; keep nested structure otherwise.
        if isinstance(part, list) and rng.random() < 0.25:
            children.extend(part)
        else:
            children.append(part)
    return children


def perturb(rng, shape):
    shape = list(shape)
    i = rng.randrange(len(shape))
    l, c = shape[i]
    shape[i] = (l + 1 if l < 9 else l - 1, c)
    return shape


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20221215)
    ap.add_argument("--paragraphs", type=int, default=30, help="per rhythmic")
    ap.add_argument("--root", default=os.path.join(os.path.dirname(__file__), ".."))
    args = ap.parse_args()
    rng = random.Random(args.seed)

    toy = os.path.join(args.root, "data", "toy")
    os.makedirs(toy, exist_ok=True)
    corpus_lines, tree_lines = [], []
    pid = 0
    for rhythmic, shape in RHYTHMICS.items():
        for k in range(args.paragraphs):
            # One in eight paragraphs deviates from the canonical shape.
            s = perturb(rng, shape) if k % 8 == 7 else shape
            group = rng.choice(sorted(RHYME_FINALS))
            text = ""
            trees = []
            for i, (l, c) in enumerate(s):
                final = rng.choice(RHYME_FINALS[group]) if c == "p" else None
                words = compose(rng, l, final)
                sentence = "".join(words)
                assert len(sentence) == l
                text += sentence + ("，" if c == "c" else "。")
                tree = bracket(rng, words)
                trees.append({"paragraph_id": pid, "sentence_index": i,
                              "tree": tree if isinstance(tree, list) else [tree]})
            corpus_lines.append({"id": pid, "rhythmic": rhythmic,
                                 "author": rng.choice(AUTHORS), "paragraphs": [text]})
            tree_lines.extend(trees)
            pid += 1

    with open(os.path.join(toy, "corpus.jsonl"), "w", encoding="utf-8") as f:
        for obj in corpus_lines:
            f.write(json.dumps(obj, ensure_ascii=False) + "\n")
    with open(os.path.join(toy, "trees.jsonl"), "w", encoding="utf-8") as f:
        for obj in tree_lines:
            f.write(json.dumps(obj, ensure_ascii=False) + "\n")

    topics = ["明月照孤舟", "春雨落花", "离愁别恨", "江南烟柳", "秋霜归雁",
              "故人天涯", "西楼夜雨", "斜阳芳草", "梧桐清秋", "青山白云"]
    with open(os.path.join(toy, "prompts.jsonl"), "w", encoding="utf-8") as f:
        for topic, rhythmic in zip(topics, RHYTHMICS):
            f.write(json.dumps({"topic": topic, "rhythmic": rhythmic},
                               ensure_ascii=False) + "\n")

    write_rhyme_table(os.path.join(args.root, "data", "rhyme"), corpus_lines, topics)


FINAL_TO_CLASS = {
    "a": "发花", "ia": "发花", "ua": "发花",
    "o": "梭波", "e": "梭波", "uo": "梭波",
    "ie": "乜斜", "ve": "乜斜", "ue": "乜斜",
    "i": "一七", "v": "一七", "er": "一七",
    "u": "姑苏",
    "ai": "怀来", "uai": "怀来",
    "ei": "灰堆", "uei": "灰堆", "ui": "灰堆",
    "ao": "遥条", "iao": "遥条",
    "ou": "油求", "iou": "油求", "iu": "油求",
    "an": "言前", "ian": "言前", "uan": "言前", "van": "言前",
    "en": "人辰", "in": "人辰", "uen": "人辰", "un": "人辰", "vn": "人辰",
    "ang": "江阳", "iang": "江阳", "uang": "江阳",
    "eng": "中东", "ing": "中东", "ong": "中东", "iong": "中东", "ueng": "中东",
}


def write_rhyme_table(out_dir, corpus_lines, topics):
    from pypinyin import Style, pinyin

    chars = set()
    for hi in range(0xB0, 0xD8):  # GB2312 level-1 block
        for lo in range(0xA1, 0xFF):
            try:
                chars.add(bytes([hi, lo]).decode("gb2312"))
            except UnicodeDecodeError:
                pass
    for obj in corpus_lines:
        chars.update(ch for ch in "".join(obj["paragraphs"]) if "一" <= ch <= "鿿")
    for t in topics:
        chars.update(t)

    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for ch in sorted(chars):
        fin = pinyin(ch, style=Style.FINALS, strict=True)[0][0]
        cls = FINAL_TO_CLASS.get(fin)
        if cls:
            rows.append((ch, cls))
    with open(os.path.join(out_dir, "default.tsv"), "w", encoding="utf-8") as f:
        f.write("# character<TAB>rhyme class (thirteen-rhyme grouping of pinyin finals)\n")
        for ch, cls in rows:
            f.write(f"{ch}\t{cls}\n")


if __name__ == "__main__":
    main()
