"""Convolution, normalization, linear and pointwise layers.

All layers take [B, ...] batched tensors, register their parameters into a
shared ParameterSet under a dotted prefix at construction time, and are pure
functions of (input, params, mode). Convolutions are causal in time: output
frame t never sees input frames > t.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import as_strided

from ..grad import Function, ShapeError, Tensor, apply_function


@dataclass
class Mode:
    """Forward-pass context: train/eval switch plus the dropout RNG."""

    train: bool = False
    rng: np.random.Generator | None = None


EVAL = Mode(train=False, rng=None)


def uniform_init(rng, shape, fan_in):
    bound = float(np.sqrt(1.0 / fan_in))
    return rng.uniform(-bound, bound, size=shape).astype(np.float32)


def conv_out_size(size, kernel, stride, pad):
    return (size + 2 * pad - kernel) // stride + 1


# -- pointwise ----------------------------------------------------------------


class _EluFn(Function):
    def forward(self, x):
        neg = x < 0
        y = x.copy()
        y[neg] = np.expm1(x[neg])
        self.neg, self.y = neg, y
        return y

    def backward(self, g):
        gx = g.copy()
        gx[self.neg] = g[self.neg] * (self.y[self.neg] + 1.0)
        return (gx,)


def elu(x):
    return apply_function(_EluFn(), x)


class _SoftmaxFn(Function):
    def forward(self, x, axis):
        self.axis = axis
        shifted = x - x.max(axis=axis, keepdims=True)
        e = np.exp(shifted)
        self.y = e / e.sum(axis=axis, keepdims=True)
        return self.y

    def backward(self, g):
        dot = (g * self.y).sum(axis=self.axis, keepdims=True)
        return (self.y * (g - dot),)


def softmax(x, axis=-1):
    return apply_function(_SoftmaxFn(), x, axis=axis)


def dropout(x, p, mode):
    """Inverted dropout; identity in eval mode. The RNG comes from `mode`."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout: p must be in [0, 1), got {p}")
    if not mode.train or p == 0.0:
        return x
    if mode.rng is None:
        raise ValueError("dropout: train mode needs Mode.rng for reproducibility")
    keep = (mode.rng.random(x.shape) >= p).astype(x.dtype.type) / np.asarray(
        1.0 - p, dtype=x.dtype
    )
    return x * Tensor(keep)


# -- linear ------------------------------------------------------------------


class Linear:
    def __init__(self, params, prefix, d_in, d_out, rng):
        self.d_in, self.d_out = d_in, d_out
        self.w = params.add(f"{prefix}.w", uniform_init(rng, (d_in, d_out), d_in))
        self.b = params.add(f"{prefix}.b", uniform_init(rng, (d_out,), d_in))

    def __call__(self, x):
        if x.shape[-1] != self.d_in:
            raise ShapeError(f"linear: last dim {x.shape[-1]} != {self.d_in}")
        return x @ self.w + self.b


# -- convolution ---------------------------------------------------------------


class _Conv2dFn(Function):
    """conv over [B, C, T, F] with causal time padding and symmetric freq padding."""

    def forward(self, x, w, b, stride_f, pad_f):
        c_out, c_in, kt, kf = w.shape
        bsz, c, t, f = x.shape
        self.args = (x.shape, w.shape, stride_f, pad_f)
        xpad = np.pad(x, ((0, 0), (0, 0), (kt - 1, 0), (pad_f, pad_f)))
        f_out = conv_out_size(f, kf, stride_f, pad_f)
        col = self._col(xpad, kt, kf, stride_f, t, f_out)
        self.xpad = xpad
        y = col.reshape(bsz * t * f_out, c_in * kt * kf) @ w.reshape(c_out, -1).T
        y += b
        return np.ascontiguousarray(
            y.reshape(bsz, t, f_out, c_out).transpose(0, 3, 1, 2)
        )

    @staticmethod
    def _col(xpad, kt, kf, sf, t_out, f_out):
        bsz, c = xpad.shape[:2]
        s = xpad.strides
        view = as_strided(
            xpad,
            shape=(bsz, t_out, f_out, c, kt, kf),
            strides=(s[0], s[2], s[3] * sf, s[1], s[2], s[3]),
        )
        return np.ascontiguousarray(view)

    def backward(self, g):
        (x_shape, w_shape, sf, pf) = self.args
        c_out, c_in, kt, kf = w_shape
        bsz, c, t, f = x_shape
        f_out = g.shape[3]
        g_mat = np.ascontiguousarray(g.transpose(0, 2, 3, 1)).reshape(-1, c_out)
        col = self._col(self.xpad, kt, kf, sf, t, f_out).reshape(-1, c_in * kt * kf)
        gw = (col.T @ g_mat).T.reshape(w_shape)
        gb = g_mat.sum(axis=0)
        gcol = (g_mat @ np.ascontiguousarray(
            np.reshape(np.moveaxis(g, 0, 0), (1,))  # placeholder, replaced below
        )) if False else g_mat @ self._wmat
        gcol = gcol.reshape(bsz, t, f_out, c_in, kt, kf)
        gxpad = np.zeros_like(self.xpad)
        for i in range(kt):
            for j in range(kf):
                gxpad[:, :, i : i + t, j : j + sf * f_out : sf] += np.ascontiguousarray(
                    gcol[:, :, :, :, i, j].transpose(0, 3, 1, 2)
                )
        gx = gxpad[:, :, kt - 1 :, pf : pf + f]
        return (np.ascontiguousarray(gx), gw, gb)


class Conv2d:
    """2-D convolution, stride 1 in time, configurable stride/padding in frequency."""

    def __init__(self, params, prefix, c_in, c_out, kernel=(2, 3), stride_f=1,
                 pad_f=1, rng=None):
        kt, kf = kernel
        if kt < 1 or kf < 1:
            raise ValueError(f"conv: kernel {kernel} must be >= 1 per axis")
        self.c_in, self.c_out = c_in, c_out
        self.kernel, self.stride_f, self.pad_f = (kt, kf), stride_f, pad_f
        fan_in = c_in * kt * kf
        self.w = params.add(f"{prefix}.w", uniform_init(rng, (c_out, c_in, kt, kf), fan_in))
        self.b = params.add(f"{prefix}.b", uniform_init(rng, (c_out,), fan_in))

    def out_freq(self, f):
        return conv_out_size(f, self.kernel[1], self.stride_f, self.pad_f)

    def __call__(self, x):
        if x.ndim != 4:
            raise ShapeError(f"conv: expected [B, C, T, F], got {x.shape}")
        if x.shape[1] != self.c_in:
            raise ShapeError(f"conv: input has {x.shape[1]} channels, layer expects {self.c_in}")
        fn = _Conv2dFn()
        fn._wmat = self.w.data.reshape(self.c_out, -1)
        return apply_function(fn, x, self.w, self.b,
                              stride_f=self.stride_f, pad_f=self.pad_f)


class _GluFn(Function):
    """Gated linear unit over the channel axis: first half * sigmoid(second half)."""

    def forward(self, x):
        c2 = x.shape[1]
        if c2 % 2:
            raise ShapeError(f"glu: channel count {c2} is odd, cannot split")
        c = c2 // 2
        a, gate = x[:, :c], x[:, c:]
        sg = np.empty_like(gate)
        np.negative(np.abs(gate), out=sg)
        np.exp(sg, out=sg)
        sg = np.where(gate >= 0, 1.0 / (1.0 + sg), sg / (1.0 + sg))
        self.a, self.sg, self.c = a, sg, c
        return a * sg

    def backward(self, g):
        ga = g * self.sg
        ggate = g * self.a * self.sg * (1.0 - self.sg)
        return (np.concatenate([ga, ggate], axis=1),)


def glu(x):
    return apply_function(_GluFn(), x)


class GLUConv2d:
    """Convolution producing 2*C maps followed by a channel-split GLU."""

    def __init__(self, params, prefix, c_in, c_out, kernel=(2, 3), stride_f=1,
                 pad_f=1, rng=None):
        self.conv = Conv2d(params, prefix, c_in, 2 * c_out, kernel, stride_f, pad_f, rng)
        self.c_out = c_out

    def __call__(self, x):
        return glu(self.conv(x))


class TransGLUConv2d(GLUConv2d):
    """Stride-1 transposed-conv GLU.

    With stride 1, a transposed conv cropped to the causal window equals a
    causal conv whose kernels are flipped along both axes; the flip is
    absorbed into the learned weights, so the layer shares Conv2d's kernel.
    """


class _BatchNormFn(Function):
    def forward(self, x, gamma, beta, training, running_mean, running_var, momentum, eps):
        axes = tuple(i for i in range(x.ndim) if i != 1)
        bshape = (1, x.shape[1]) + (1,) * (x.ndim - 2)
        if training:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            running_mean *= momentum
            running_mean += (1.0 - momentum) * mean
            running_var *= momentum
            running_var += (1.0 - momentum) * var
        else:
            mean, var = running_mean, running_var
        invstd = 1.0 / np.sqrt(var + eps)
        xhat = (x - mean.reshape(bshape)) * invstd.reshape(bshape)
        self.training, self.axes, self.bshape = training, axes, bshape
        self.xhat, self.invstd, self.gamma = xhat, invstd, gamma
        self.count = x.size // x.shape[1]
        return gamma.reshape(bshape) * xhat + beta.reshape(bshape)

    def backward(self, g):
        bshape, axes = self.bshape, self.axes
        g_gamma = (g * self.xhat).sum(axis=axes)
        g_beta = g.sum(axis=axes)
        gs = g * self.gamma.reshape(bshape)
        if self.training:
            m1 = gs.mean(axis=axes).reshape(bshape)
            m2 = (gs * self.xhat).mean(axis=axes).reshape(bshape)
            gx = self.invstd.reshape(bshape) * (gs - m1 - self.xhat * m2)
        else:
            gx = gs * self.invstd.reshape(bshape)
        return (gx.astype(g.dtype, copy=False), g_gamma, g_beta)


class BatchNorm2d:
    """Per-channel normalization over (batch, time, freq); momentum-0.9 running stats."""

    def __init__(self, params, prefix, channels, momentum=0.9, eps=1e-5):
        self.channels = channels
        self.momentum, self.eps = momentum, eps
        self.gamma = params.add(f"{prefix}.gamma", np.ones(channels, np.float32))
        self.beta = params.add(f"{prefix}.beta", np.zeros(channels, np.float32))
        self.prefix = prefix
        self.running_mean = np.zeros(channels, np.float32)
        self.running_var = np.ones(channels, np.float32)

    def buffers(self):
        return {f"{self.prefix}.running_mean": self.running_mean,
                f"{self.prefix}.running_var": self.running_var}

    def load_buffers(self, arrays):
        self.running_mean[:] = arrays[f"{self.prefix}.running_mean"]
        self.running_var[:] = arrays[f"{self.prefix}.running_var"]

    def __call__(self, x, mode=EVAL):
        if x.shape[1] != self.channels:
            raise ShapeError(f"batchnorm: {x.shape[1]} channels, expected {self.channels}")
        if mode.train and x.size // x.shape[1] < 2:
            raise ShapeError("batchnorm: train mode needs >= 2 elements per channel")
        return apply_function(
            _BatchNormFn(), x, self.gamma, self.beta,
            training=mode.train, running_mean=self.running_mean,
            running_var=self.running_var, momentum=self.momentum, eps=self.eps,
        )
