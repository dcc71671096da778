#!/usr/bin/env python3
"""Regenerate tests/golden/nn_forward.npz.

Freezes a cross-check of the network forward pass against torch: we export
one seeded network's weights, rebuild the same architecture in torch, run
both on a seeded batch, and store weights + input + torch's outputs. The
test reloads the weights into a fresh network and must reproduce the stored
outputs within 1e-5. torch is only needed to regenerate, never at runtime.

Run from the repo root:  python tools/make_nn_golden.py
"""

import numpy as np
import torch

from rlser.nn.network import QNetwork

OUT = "tests/golden/nn_forward.npz"


def torch_forward(net: QNetwork, x: np.ndarray) -> np.ndarray:
    f1, f2 = net.architecture["conv_filters"]
    h, w = net.architecture["input_shape"]
    units = net.architecture["lstm_units"]
    dense = net.architecture["dense_units"]
    n_out = net.architecture["n_outputs"]

    conv1 = torch.nn.Conv2d(1, f1, 5, padding=2)
    bn = torch.nn.BatchNorm2d(f1, eps=net.bn.eps)
    conv2 = torch.nn.Conv2d(f1, f2, 3, padding=1)
    lstm = torch.nn.LSTM(input_size=h * f2, hidden_size=units, batch_first=True)
    dense1 = torch.nn.Linear(units, dense)
    head = torch.nn.Linear(dense, n_out)

    p = net.params()

    def t(a):
        return torch.from_numpy(np.asarray(a, dtype=np.float64))

    with torch.no_grad():
        # conv kernels: ours (kh, kw, in, out) -> torch (out, in, kh, kw)
        conv1.weight.copy_(t(p["conv1/kernel"]).permute(3, 2, 0, 1))
        conv1.bias.copy_(t(p["conv1/bias"]))
        conv2.weight.copy_(t(p["conv2/kernel"]).permute(3, 2, 0, 1))
        conv2.bias.copy_(t(p["conv2/bias"]))
        bn.weight.copy_(t(p["bn/gamma"]))
        bn.bias.copy_(t(p["bn/beta"]))
        bn.running_mean.copy_(t(net.bn.running_mean))
        bn.running_var.copy_(t(net.bn.running_var))
        # our packed gate order is (i, f, o, g); torch wants (i, f, g, o)
        u = units

        def regate(mat):
            i, f, o, g = mat[:, :u], mat[:, u : 2 * u], mat[:, 2 * u : 3 * u], mat[:, 3 * u :]
            return np.concatenate([i, f, g, o], axis=1)

        lstm.weight_ih_l0.copy_(t(regate(p["lstm/kernel"])).T)
        lstm.weight_hh_l0.copy_(t(regate(p["lstm/recurrent"])).T)
        bias = np.asarray(p["lstm/bias"], dtype=np.float64)
        lstm.bias_ih_l0.copy_(t(regate(bias[None])[0]))
        lstm.bias_hh_l0.zero_()
        dense1.weight.copy_(t(p["dense/kernel"]).T)
        dense1.bias.copy_(t(p["dense/bias"]))
        head.weight.copy_(t(p["head/kernel"]).T)
        head.bias.copy_(t(p["head/bias"]))

    for mod in (conv1, bn, conv2, lstm, dense1, head):
        mod.double().eval()

    with torch.no_grad():
        xt = torch.from_numpy(x.astype(np.float64))[:, None]  # (N, 1, H, W)
        y = torch.relu(conv1(xt))
        y = bn(y)
        y = torch.relu(conv2(y))
        y = y.permute(0, 3, 2, 1).reshape(y.shape[0], w, h * f2)  # (N, W, H*C)
        seq, _ = lstm(y)
        y = torch.relu(dense1(seq[:, -1]))
        return head(y).numpy()


def main():
    net = QNetwork(seed=123)
    # non-trivial running stats so the eval batch-norm path is exercised
    stats_rng = np.random.default_rng(7)
    net.bn.running_mean[...] = stats_rng.normal(0.0, 0.5, net.bn.running_mean.shape).astype(np.float32)
    net.bn.running_var[...] = stats_rng.uniform(0.5, 2.0, net.bn.running_var.shape).astype(np.float32)

    x = np.random.default_rng(42).normal(0.0, 1.0, (4, 40, 87)).astype(np.float32)
    expected = torch_forward(net, x)
    ours = net.forward(x)
    print("max |ours - torch|:", np.abs(ours - expected).max())

    tensors = {f"tensor:{k}": v for k, v in net.state_tensors().items()}
    np.savez_compressed(OUT, input=x, expected=expected.astype(np.float64), **tensors)
    print(f"wrote {OUT} with {len(tensors)} tensors, expected shape {expected.shape}")


if __name__ == "__main__":
    main()
