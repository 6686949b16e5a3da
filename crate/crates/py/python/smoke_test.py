"""Smoke test for the campaignminer extension module.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`.
"""

import json
import math
import os
import tempfile

import campaignminer as cm

SMALL = {"days": 4, "n_organic": 200, "bots_per_farm": 8, "bot_volume": 110.0, "organic_retweet_prob": 0.004}


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    pr = cm.pagerank([("a", "b", 1)])  # a retweets b
    assert close(pr["a"], 20 / 57) and close(pr["b"], 37 / 57), pr
    assert close(sum(cm.pagerank([("a", "b", 2), ("b", "c", 1), ("c", "a", 3)]).values()), 1.0)

    assert close(cm.topical_entropy([0.25] * 4), math.log(4))
    assert cm.topical_entropy([1.0, 0.0]) == 0.0
    assert close(cm.pairwise_jaccard({"1", "2", "3"}, {"2", "3", "4"}), 0.5)
    assert cm.transfer_entropy([True, False] * 50, [False, True] * 50) >= 0.0

    corpus, truth = cm.generate_campaign(seed=1, config_json=json.dumps(SMALL))
    again, _ = cm.generate_campaign(seed=1, config_json=json.dumps(SMALL))
    assert corpus.to_ndjson() == again.to_ndjson()
    assert len(corpus) > 0 and corpus.retweet_count() > 0
    print(corpus)

    topics = cm.topics(corpus)
    assert len(topics) == 5, topics
    assert any(t["relevant"] for t in topics)

    inf = cm.influence_scores(corpus)
    top = [u for u, _ in cm.top_influentials(inf, 8)]
    assert set(top) == set(truth["influencer_ids"]), (top, truth["influencer_ids"])

    ur = {u: cm.unique_retweet_ratio(corpus, u) for u in truth["influencer_ids"]}
    lowest = sorted(ur, key=ur.get)[:3]
    assert set(lowest) == set(truth["bot_amplified_ids"]), ur

    rj = cm.retweet_jaccard(corpus, truth["influencer_ids"])
    assert all(0.0 <= v <= 1.0 for v in rj.values())

    te = cm.direct_retweeter_influence(corpus, truth["bot_amplified_ids"][0])
    assert te and all(v >= 0.0 for v in te.values())

    reparsed, stats = cm.Corpus.from_ndjson(corpus.to_ndjson())
    assert len(reparsed) == len(corpus) and stats["malformed"] == 0

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "tweets.ndjson")
        with open(path, "w", encoding="utf-8") as f:
            f.write(corpus.to_ndjson())
        out = os.path.join(tmp, "report")
        cm.run("report", json.dumps({"input": path, "out": out}))
        for name in ["topics.csv", "influence.csv", "ur.csv", "jaccard.csv", "config.json"]:
            assert os.path.exists(os.path.join(out, name)), name

    try:
        cm.pagerank([("a", "b", 1)], mode="bogus")
    except ValueError:
        pass
    else:
        raise AssertionError("bad mode accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
