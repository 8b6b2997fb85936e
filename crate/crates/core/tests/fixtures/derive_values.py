#!/usr/bin/env python3
"""Independent high-precision evaluation of the closed-form reference values
used by the unit and acceptance tests. Run with `python3 derive_values.py` to
regenerate `derived_values.json`. Uses mpmath only; shares no code with the
Rust implementation."""
import json
import os
from mpmath import mp, mpf, log, sqrt

mp.dps = 40


def log2(x):
    return log(mpf(x), 2)


values = {}

# One block, E=2, N=3, P=2/3: E log2 P + (N-E) log2 (1-P).
p = mpf(2) / 3
ll = 2 * log2(p) + 1 * log2(1 - p)
values["loglik_e2_n3"] = {
    "value": float(ll),
    "derivation": "2*log2(2/3) + 1*log2(1/3)",
}

# Model code length: T=1, M=0, c=1, 3 active nodes, one block N_11=3.
model = log2(1) + log2(1 - 1 + 1 + 1) + 0 + mpf(1) / 2 * log2(3)
values["model_t1_three_nodes"] = {
    "value": float(model),
    "derivation": "log2(0+1) + log2((T+1)-1+1) + 0 + 0.5*log2(3)",
}

values["residual_t1_three_nodes"] = {
    "value": float(-ll),
    "derivation": "negative of loglik_e2_n3",
}

values["full_t1_path_graph"] = {
    "value": float(model - ll),
    "derivation": "model_t1_three_nodes + residual_t1_three_nodes",
}

# Screening distance: disjoint single edges on four nodes.
values["distance_disjoint_single_edges"] = {
    "value": float((mpf(2) + 2) / sqrt(mpf(2) * 2)),
    "derivation": "(2+2)/sqrt(2*2), each undirected edge counted twice",
}

# A={{0,1}}, B={{0,1},{2,3}}.
values["distance_nested"] = {
    "value": float(mpf(2) / sqrt(mpf(2) * 4)),
    "derivation": "2/sqrt(2*4)",
}

# NMI, truth {a,b|c,d} vs est {a,c|b,d}: every cell count 1 of n=4.
n = mpf(4)
mi = sum((mpf(1) / n) * log(n * 1 / (2 * 2)) for _ in range(4))
h = -2 * (mpf(2) / n) * log(mpf(2) / n)
values["nmi_crossed_pairs"] = {
    "value": float(mi / ((h + h) / 2)),
    "derivation": "I = sum 1/4*ln(4*1/(2*2)) = 0; NMI = I/H",
}

out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "derived_values.json")
with open(out, "w") as f:
    json.dump(values, f, indent=2, sort_keys=True)
    f.write("\n")
print(json.dumps(values, indent=2, sort_keys=True))
