"""Network layers with hand-written forward/backward passes.

Layout is channels-last: images are (N, H, W, C), sequences are (N, T, D).
Convolutions are stride-1 with 'same' padding, lowered to BLAS GEMMs: a
single-channel input uses one transposed-patch GEMM, multi-channel inputs
accumulate one GEMM per kernel tap in place (beta=1), which avoids the slow
strided gathers of a naive im2col. All math preserves the parameter dtype
(float32 in production, float64 in the finite-difference tests).

Each layer keeps its parameters in `params` and accumulates gradients into
`grads` (same keys) during backward. A train-mode forward caches what
backward needs; backward without a cached forward raises.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import blas as _blas


class LayerError(RuntimeError):
    pass


def gemm_acc(a: np.ndarray, b: np.ndarray, c: np.ndarray, beta: float = 1.0) -> None:
    """c += a @ b (or beta*c + a@b), in place, for C-contiguous operands.

    Runs as a column-major GEMM on the transposed views, so BLAS writes
    straight into c with no temporaries.
    """
    fn = _blas.sgemm if a.dtype == np.float32 else _blas.dgemm
    out = fn(1.0, b.T, a.T, beta=beta, c=c.T, overwrite_c=1)
    if out.ctypes.data != c.ctypes.data:  # would mean scipy had to copy
        raise LayerError("gemm_acc operands must be C-contiguous")


class Layer:
    """Base: parameter registry plus the forward/backward contract.

    Layers reuse large work buffers across calls (keyed by name and shape):
    at training batch sizes, fresh allocations cost more in page faults than
    the GEMMs they feed. A buffer handed out in one forward is valid until
    the same layer runs the same-shaped forward again, which is compatible
    with the forward-then-backward discipline of a training step.
    """

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self._cache = None
        self._scratch: dict[tuple, np.ndarray] = {}

    def _buf(self, name: str, shape: tuple, dtype, zero: bool = False) -> np.ndarray:
        key = (name, shape, np.dtype(dtype).str)
        buf = self._scratch.get(key)
        if buf is None:
            buf = np.zeros(shape, dtype) if zero else np.empty(shape, dtype)
            self._scratch[key] = buf
        elif zero:
            buf.fill(0)
        return buf

    def _pad_buf(self, name: str, x: np.ndarray, ph: int, pw: int) -> np.ndarray:
        """Zero-padded copy of x in a reused buffer. The border is zeroed only
        when the buffer is created; interior writes never touch it."""
        n, h, w = x.shape[:3]
        shape = (n, h + 2 * ph, w + 2 * pw) + x.shape[3:]
        key = (name, shape, np.dtype(x.dtype).str)
        buf = self._scratch.get(key)
        if buf is None:
            buf = np.zeros(shape, x.dtype)
            self._scratch[key] = buf
        buf[:, ph : ph + h, pw : pw + w] = x
        return buf

    def zero_grads(self):
        for k, v in self.params.items():
            self.grads[k] = np.zeros_like(v)

    def forward(self, x: np.ndarray, train: bool = False, rng: np.random.Generator | None = None) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _take_cache(self):
        if self._cache is None:
            raise LayerError(f"{type(self).__name__}.backward called without a cached train-mode forward")
        cache, self._cache = self._cache, None
        return cache


def he_uniform(rng: np.random.Generator, shape, fan_in: int, dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int, dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def orthogonal(rng: np.random.Generator, n: int, dtype) -> np.ndarray:
    a = rng.normal(0.0, 1.0, size=(n, n))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))  # make the decomposition unique
    return q.astype(dtype)


def _pad_hw(x: np.ndarray, ph: int, pw: int) -> np.ndarray:
    n, h, w = x.shape[:3]
    shape = (n, h + 2 * ph, w + 2 * pw) + x.shape[3:]
    out = np.zeros(shape, dtype=x.dtype)
    out[:, ph : ph + h, pw : pw + w] = x
    return out


class Conv2D(Layer):
    """Stride-1 'same' 2-D convolution, optionally fused with ReLU."""

    def __init__(self, in_channels: int, filters: int, kernel: int, relu: bool = True,
                 rng: np.random.Generator | None = None, dtype=np.float32):
        super().__init__()
        self.kh = self.kw = kernel
        self.in_channels = in_channels
        self.filters = filters
        self.relu = relu
        self.is_input_layer = False  # set to skip the unused input gradient
        rng = rng or np.random.default_rng()
        self.params["kernel"] = he_uniform(rng, (kernel, kernel, in_channels, filters),
                                           fan_in=kernel * kernel * in_channels, dtype=dtype)
        self.params["bias"] = np.zeros(filters, dtype=dtype)
        self.zero_grads()

    # -- single-channel path: one GEMM over a (taps, N*H*W) patch matrix ----

    def _patch_rows(self, xp: np.ndarray, h: int, w: int) -> np.ndarray:
        n = xp.shape[0]
        rows = self._buf("rows", (self.kh * self.kw, n * h * w), xp.dtype)
        for i in range(self.kh):
            for j in range(self.kw):
                rows[i * self.kw + j] = xp[:, i : i + h, j : j + w].reshape(-1)
        return rows

    def forward(self, x, train=False, rng=None):
        n, h, w, c = x.shape
        if c != self.in_channels:
            raise LayerError(f"expected {self.in_channels} input channels, got {c}")
        ph, pw = self.kh // 2, self.kw // 2
        kernel = self.params["kernel"]
        y_flat = self._buf("y", (n * h * w, self.filters), kernel.dtype, zero=(c != 1))

        if c == 1:
            xp = self._pad_buf("xp", x[..., 0], ph, pw)
            rows = self._patch_rows(xp, h, w)
            np.matmul(rows.T, kernel.reshape(self.kh * self.kw, self.filters), out=y_flat)
        else:
            xp = self._pad_buf("xp", x, ph, pw)
            buf = self._buf("shift", (n, h, w, c), kernel.dtype)
            for i in range(self.kh):
                for j in range(self.kw):
                    buf[...] = xp[:, i : i + h, j : j + w, :]
                    gemm_acc(buf.reshape(-1, c), kernel[i, j], y_flat)

        y = y_flat.reshape(n, h, w, self.filters)
        y += self.params["bias"]
        if self.relu:
            np.maximum(y, 0.0, out=y)
        if train:
            mask = None
            if self.relu:
                mask = self._buf("relu_mask", y.shape, np.bool_)
                np.greater(y, 0.0, out=mask)
            self._cache = (x, mask)
        return y

    def backward(self, dy):
        x, mask = self._take_cache()
        if self.relu:
            dy = dy * mask
        n, h, w, c = x.shape
        ph, pw = self.kh // 2, self.kw // 2
        kernel = self.params["kernel"]
        dy_flat = dy.reshape(-1, self.filters)
        self.grads["bias"] += dy_flat.sum(axis=0)

        if c == 1:
            xp = self._pad_buf("xp", x[..., 0], ph, pw)
            rows = self._patch_rows(xp, h, w)
            dk = rows @ dy_flat  # (taps, F)
            self.grads["kernel"] += dk.reshape(self.kh, self.kw, 1, self.filters)
            if self.is_input_layer:
                return None
            dxp = self._buf("dxp", xp.shape, kernel.dtype, zero=True)
            for i in range(self.kh):
                for j in range(self.kw):
                    tap = kernel[i, j, 0]  # (F,)
                    dxp[:, i : i + h, j : j + w] += (dy_flat @ tap).reshape(n, h, w)
            return dxp[:, ph : ph + h, pw : pw + w][..., None]

        xp = self._pad_buf("xp", x, ph, pw)
        buf = self._buf("shift", (n, h, w, c), kernel.dtype)
        for i in range(self.kh):
            for j in range(self.kw):
                buf[...] = xp[:, i : i + h, j : j + w, :]
                self.grads["kernel"][i, j] += buf.reshape(-1, c).T @ dy_flat

        if self.is_input_layer:
            return None
        # dx: same-padded correlation of dy with the flipped kernel,
        # accumulated one tap at a time into a flat buffer
        dyp = self._pad_buf("dyp", dy, ph, pw)
        dx_flat = self._buf("dx", (n * h * w, c), kernel.dtype, zero=True)
        dbuf = self._buf("dshift", (n, h, w, self.filters), kernel.dtype)
        for i in range(self.kh):
            for j in range(self.kw):
                dbuf[...] = dyp[:, i : i + h, j : j + w, :]
                flip = kernel[self.kh - 1 - i, self.kw - 1 - j]  # (C, F)
                gemm_acc(dbuf.reshape(-1, self.filters), np.ascontiguousarray(flip.T), dx_flat)
        return dx_flat.reshape(n, h, w, c)


class BatchNorm(Layer):
    """Per-channel batch normalization over (N, H, W)."""

    def __init__(self, channels: int, eps: float = 1e-3, momentum: float = 0.99, dtype=np.float32):
        super().__init__()
        self.eps = eps
        self.momentum = momentum
        self.freeze_stats = False  # stop running-stat updates (RL fine-tuning knob)
        self.params["gamma"] = np.ones(channels, dtype=dtype)
        self.params["beta"] = np.zeros(channels, dtype=dtype)
        self.running_mean = np.zeros(channels, dtype=dtype)
        self.running_var = np.ones(channels, dtype=dtype)
        self.zero_grads()

    def _affine(self, x, scale, shift):
        out = self._buf("y", x.shape, x.dtype)
        np.multiply(x, scale.astype(x.dtype), out=out)
        out += shift.astype(x.dtype)
        return out

    def forward(self, x, train=False, rng=None):
        gamma, beta = self.params["gamma"], self.params["beta"]
        if not train:
            inv = 1.0 / np.sqrt(self.running_var + self.eps)
            scale = gamma * inv
            return self._affine(x, scale, beta - self.running_mean * scale)
        c = x.shape[-1]
        flat = x.reshape(-1, c)
        m = flat.shape[0]
        mean = flat.mean(axis=0)
        var = np.einsum("nc,nc->c", flat, flat) / m - mean * mean
        var = np.maximum(var, 0.0)
        inv = 1.0 / np.sqrt(var + self.eps)
        if not self.freeze_stats:
            mom = self.momentum
            self.running_mean = (mom * self.running_mean + (1 - mom) * mean).astype(x.dtype)
            self.running_var = (mom * self.running_var + (1 - mom) * var).astype(x.dtype)
        self._cache = (x, mean, inv)
        scale = gamma * inv
        return self._affine(x, scale, beta - mean * scale)

    def backward(self, dy):
        x, mean, inv = self._take_cache()
        gamma = self.params["gamma"]
        c = x.shape[-1]
        flat_x = x.reshape(-1, c)
        flat_dy = dy.reshape(-1, c)
        m = flat_x.shape[0]

        xhat = self._buf("xhat", flat_x.shape, x.dtype)
        np.subtract(flat_x, mean.astype(x.dtype), out=xhat)
        xhat *= inv.astype(x.dtype)
        dgamma = np.einsum("nc,nc->c", flat_dy, xhat)
        dbeta = flat_dy.sum(axis=0)
        self.grads["gamma"] += dgamma
        self.grads["beta"] += dbeta
        # gradient through the batch statistics:
        # dx = (dy - mean(dy) - xhat * mean(dy*xhat)) * gamma * inv
        dx = self._buf("dx", flat_x.shape, x.dtype)
        np.multiply(xhat, (dgamma / m).astype(x.dtype), out=dx)
        np.subtract(flat_dy, dx, out=dx)
        dx -= (dbeta / m).astype(x.dtype)
        dx *= (gamma * inv).astype(x.dtype)
        return dx.reshape(x.shape)


class SequenceFold(Layer):
    """(N, H, W, C) image -> (N, W, H*C) sequence: the time axis (W) becomes
    the sequence axis and each step carries the flattened frequency/channel
    content."""

    def forward(self, x, train=False, rng=None):
        n, h, w, c = x.shape
        if train:
            self._cache = (h, c)
        out = self._buf("seq", (n, w, h, c), x.dtype)
        np.copyto(out, x.transpose(0, 2, 1, 3))
        return out.reshape(n, w, h * c)

    def backward(self, dy):
        h, c = self._take_cache()
        n, w, _ = dy.shape
        out = self._buf("img", (n, h, w, c), dy.dtype)
        np.copyto(out, dy.reshape(n, w, h, c).transpose(0, 2, 1, 3))
        return out


class LSTM(Layer):
    """Single LSTM layer returning the final hidden state (N, units).

    Gate order in the packed kernels is (input, forget, output, candidate),
    so one sigmoid covers the first three blocks and one tanh the last. The
    forget-gate bias initializes to 1.
    """

    def __init__(self, input_dim: int, units: int, rng: np.random.Generator | None = None, dtype=np.float32):
        super().__init__()
        self.units = units
        self.input_dim = input_dim
        rng = rng or np.random.default_rng()
        self.params["kernel"] = glorot_uniform(rng, (input_dim, 4 * units), input_dim, 4 * units, dtype)
        self.params["recurrent"] = np.concatenate(
            [orthogonal(rng, units, dtype) for _ in range(4)], axis=1
        )
        bias = np.zeros(4 * units, dtype=dtype)
        bias[units : 2 * units] = 1.0
        self.params["bias"] = bias
        self.zero_grads()

    def forward(self, x, train=False, rng=None):
        n, t, d = x.shape
        u = self.units
        wx, wh, b = self.params["kernel"], self.params["recurrent"], self.params["bias"]
        # every timestep's input projection in one GEMM
        zx_flat = self._buf("zx", (n * t, 4 * u), wx.dtype)
        np.matmul(x.reshape(n * t, d), wx, out=zx_flat)
        zx = zx_flat.reshape(n, t, 4 * u)
        zx += b
        h = np.zeros((n, u), dtype=wx.dtype)
        c = np.zeros((n, u), dtype=wx.dtype)
        steps = []
        for step in range(t):
            z = zx[:, step] + h @ wh
            # sigmoid on the (i, f, o) block, tanh on the candidate block;
            # clamp keeps exp finite in float32 without changing the result
            gates = z[:, : 3 * u]
            np.clip(gates, -80.0, 80.0, out=gates)
            np.negative(gates, out=gates)
            np.exp(gates, out=gates)
            gates += 1.0
            np.reciprocal(gates, out=gates)
            i = z[:, :u]
            f = z[:, u : 2 * u]
            o = z[:, 2 * u : 3 * u]
            g = np.tanh(z[:, 3 * u :])
            c_prev = c
            c = f * c_prev + i * g
            tc = np.tanh(c)
            h_prev = h
            h = o * tc
            if train:
                steps.append((z, g, c_prev, tc, h_prev))
        if train:
            self._cache = (x, steps)
        return h

    def backward(self, dy):
        x, steps = self._take_cache()
        n, t, d = x.shape
        u = self.units
        wx, wh = self.params["kernel"], self.params["recurrent"]
        dh = dy.astype(wx.dtype, copy=True)
        dc = np.zeros_like(dh)
        dz_all = self._buf("dz", (n, t, 4 * u), wx.dtype)
        dwh = np.zeros_like(wh)
        for step in range(t - 1, -1, -1):
            z, g, c_prev, tc, h_prev = steps[step]
            i = z[:, :u]
            f = z[:, u : 2 * u]
            o = z[:, 2 * u : 3 * u]
            do = dh * tc
            dc = dc + dh * o * (1.0 - tc * tc)
            dz = dz_all[:, step]
            dz[:, :u] = dc * g * i * (1 - i)
            dz[:, u : 2 * u] = dc * c_prev * f * (1 - f)
            dz[:, 2 * u : 3 * u] = do * o * (1 - o)
            dz[:, 3 * u :] = dc * i * (1 - g * g)
            dwh += h_prev.T @ dz
            dh = dz @ wh.T
            dc = dc * f
        dz_flat = dz_all.reshape(n * t, 4 * u)
        self.grads["kernel"] += x.reshape(n * t, d).T @ dz_flat
        self.grads["recurrent"] += dwh
        self.grads["bias"] += dz_flat.sum(axis=0)
        dx = self._buf("dxseq", (n * t, d), wx.dtype)
        np.matmul(dz_flat, wx.T, out=dx)
        return dx.reshape(n, t, d)


class Dense(Layer):
    def __init__(self, input_dim: int, units: int, relu: bool = False,
                 rng: np.random.Generator | None = None, dtype=np.float32):
        super().__init__()
        self.relu = relu
        rng = rng or np.random.default_rng()
        self.params["kernel"] = he_uniform(rng, (input_dim, units), input_dim, dtype)
        self.params["bias"] = np.zeros(units, dtype=dtype)
        self.zero_grads()

    def forward(self, x, train=False, rng=None):
        y = x @ self.params["kernel"] + self.params["bias"]
        if train:
            self._cache = (x, y if self.relu else None)
        if self.relu:
            y = np.maximum(y, 0.0)
        return y

    def backward(self, dy):
        x, pre_relu = self._take_cache()
        if self.relu:
            dy = dy * (pre_relu > 0)
        self.grads["kernel"] += x.T @ dy
        self.grads["bias"] += dy.sum(axis=0)
        return dy @ self.params["kernel"].T


class Dropout(Layer):
    """Inverted dropout; identity in eval mode."""

    def __init__(self, rate: float):
        super().__init__()
        if not (0.0 <= rate < 1.0):
            raise ValueError("dropout rate must be in [0, 1)")
        self.rate = rate

    def forward(self, x, train=False, rng=None):
        if not train or self.rate == 0.0:
            return x
        if rng is None:
            raise LayerError("train-mode dropout needs an rng")
        mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        mask = mask.astype(x.dtype)
        self._cache = mask
        return x * mask

    def backward(self, dy):
        if self.rate == 0.0:
            return dy
        mask = self._take_cache()
        return dy * mask
