"""Reference UAR numbers reported by the original large-corpus RL-DA study.

These came from runs on the licensed IEMOCAP / MSP-IMPROV / ESD / EmoDB
corpora with long training budgets and are NOT reproducible at desk scale;
they are recorded for orientation only and are never used as test oracles.
Values are UAR % as (mean, std).
"""

# Separate source/target composition (cross-corpus CC, cross-language CL)
SEPARATE_UAR = {
    ("IEM", "ESD"): {"sl_da": (63.54, 2.11), "rl_da": (63.99, 1.95)},
    ("MSP", "ESD"): {"sl_da": (63.18, 3.34), "rl_da": (66.10, 0.84)},
    ("IEM", "EmoDB"): {"sl_da": (74.67, 1.03), "rl_da": (73.17, 0.62)},
    ("MSP", "EmoDB"): {"sl_da": (56.67, 8.26), "rl_da": (65.50, 0.71)},
}

# 50% of source held out of pre-training and mixed into the adaptation set
MIXED_UAR = {
    ("IEM", "IEM + ESD"): {"sl_da": (56.22, 1.15), "rl_da": (77.86, 0.43)},
    ("MSP", "MSP + ESD"): {"sl_da": (55.52, 0.97), "rl_da": (63.51, 2.40)},
    ("IEM", "IEM + EmoDB"): {"sl_da": (61.33, 5.44), "rl_da": (85.67, 2.72)},
    ("MSP", "MSP + EmoDB"): {"sl_da": (59.17, 1.43), "rl_da": (77.33, 1.43)},
}

# Simulated live data feed; the SL baseline is the static source model.
# Noise rows mixed kitchen-environment background at -5 dB SNR.
LIVE_FEED_UAR = {
    ("IEM", "ESD"): {"sl_da": (53.11, 1.45), "rl_da": (62.89, 0.51), "delta": 9.78},
    ("MSP", "ESD"): {"sl_da": (47.07, 2.56), "rl_da": (63.18, 2.15), "delta": 16.11},
    ("IEM", "EmoDB"): {"sl_da": (60.67, 1.70), "rl_da": (73.83, 1.55), "delta": 13.16},
    ("MSP", "EmoDB"): {"sl_da": (46.50, 1.08), "rl_da": (66.17, 0.24), "delta": 19.67},
    ("IEM", "ESD + noise"): {"sl_da": (53.11, 1.45), "rl_da": (63.62, 1.65), "delta": 10.51},
    ("MSP", "ESD + noise"): {"sl_da": (47.07, 2.56), "rl_da": (57.77, 1.46), "delta": 10.70},
    ("IEM", "EmoDB + noise"): {"sl_da": (60.67, 1.70), "rl_da": (68.50, 3.63), "delta": 7.83},
    ("MSP", "EmoDB + noise"): {"sl_da": (46.50, 1.08), "rl_da": (63.67, 1.65), "delta": 17.17},
}

# Headline improvements over the static baseline in the live-feed setting
LIVE_FEED_IMPROVEMENT_PCT = {"cross_corpus": 11.0, "cross_language": 14.0}
