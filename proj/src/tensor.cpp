#include "sfo/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sfo/fft.hpp"

namespace sfo {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t s = 1;
  for (std::size_t d : shape) s *= d;
  return s;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i)
    os << (i ? "," : "") << shape[i];
  os << "]";
  return os.str();
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  Tensor t;
  t.v.assign(shape_size(shape), 0.0);
  t.shape = std::move(shape);
  return t;
}

Tensor Tensor::scalar(double x) {
  Tensor t;
  t.shape = {};
  t.v = {x};
  return t;
}

Tensor Tensor::from(std::vector<std::size_t> shape, std::vector<double> vals) {
  if (shape_size(shape) != vals.size())
    throw std::invalid_argument("Tensor::from: value count does not match " +
                                shape_str(shape));
  Tensor t;
  t.shape = std::move(shape);
  t.v = std::move(vals);
  return t;
}

int Tape::add_node(std::size_t out_size, BackwardFn backward) {
  nodes_.push_back(Node{out_size, std::move(backward)});
  grads_.emplace_back(out_size, 0.0);
  return static_cast<int>(nodes_.size()) - 1;
}

Tensor Tape::leaf(std::vector<std::size_t> shape, std::vector<double> values) {
  Tensor t = Tensor::from(std::move(shape), std::move(values));
  t.tape = this;
  t.node = add_node(t.size(), nullptr);
  return t;
}

Tensor Tape::leaf(const Tensor& src) { return leaf(src.shape, src.v); }

void Tape::accumulate(int node, const double* g, std::size_t len) {
  if (node < 0) return;
  auto& buf = grads_[static_cast<std::size_t>(node)];
  for (std::size_t i = 0; i < len; ++i) buf[i] += g[i];
}

void Tape::backward(const Tensor& loss) {
  if (!loss.on_tape() || loss.tape != this)
    throw std::runtime_error("backward: loss is detached from this tape");
  if (loss.size() != 1)
    throw std::invalid_argument("backward: loss must be a scalar");
  for (auto& g : grads_) std::fill(g.begin(), g.end(), 0.0);
  grads_[static_cast<std::size_t>(loss.node)][0] = 1.0;
  for (int i = loss.node; i >= 0; --i) {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.backward) n.backward(*this, grads_[static_cast<std::size_t>(i)]);
  }
}

const std::vector<double>& Tape::grad(const Tensor& t) const {
  if (!t.on_tape() || t.tape != this)
    throw std::runtime_error("grad: tensor is detached from this tape");
  return grads_[static_cast<std::size_t>(t.node)];
}

namespace {

Tape* common_tape(std::initializer_list<const Tensor*> ts) {
  Tape* tape = nullptr;
  for (const Tensor* t : ts) {
    if (!t->on_tape()) continue;
    if (tape && tape != t->tape)
      throw std::runtime_error("op combines tensors from different tapes");
    tape = t->tape;
  }
  return tape;
}

Tensor make_result(Tape* tape, std::vector<std::size_t> shape,
                   std::vector<double> vals, Tape::BackwardFn backward) {
  Tensor t = Tensor::from(std::move(shape), std::move(vals));
  if (tape) {
    t.tape = tape;
    t.node = tape->add_node(t.size(), std::move(backward));
  }
  return t;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape)
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                shape_str(a.shape) + " vs " +
                                shape_str(b.shape));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  Tape* tape = common_tape({&a, &b});
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.v[i] + b.v[i];
  const int pa = a.node, pb = b.node;
  return make_result(tape, a.shape, std::move(out),
                     [pa, pb](Tape& t, const std::vector<double>& g) {
                       t.accumulate(pa, g.data(), g.size());
                       t.accumulate(pb, g.data(), g.size());
                     });
}

Tensor scale(const Tensor& a, double c) {
  Tape* tape = common_tape({&a});
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.v[i] * c;
  const int pa = a.node;
  return make_result(tape, a.shape, std::move(out),
                     [pa, c](Tape& t, const std::vector<double>& g) {
                       if (pa < 0) return;
                       std::vector<double> ga(g.size());
                       for (std::size_t i = 0; i < g.size(); ++i)
                         ga[i] = g[i] * c;
                       t.accumulate(pa, ga.data(), ga.size());
                     });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  Tape* tape = common_tape({&a, &b});
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.v[i] * b.v[i];
  const int pa = a.node, pb = b.node;
  std::vector<double> av = a.v, bv = b.v;
  return make_result(
      tape, a.shape, std::move(out),
      [pa, pb, av = std::move(av), bv = std::move(bv)](
          Tape& t, const std::vector<double>& g) {
        std::vector<double> buf(g.size());
        if (pa >= 0) {
          for (std::size_t i = 0; i < g.size(); ++i) buf[i] = g[i] * bv[i];
          t.accumulate(pa, buf.data(), buf.size());
        }
        if (pb >= 0) {
          for (std::size_t i = 0; i < g.size(); ++i) buf[i] = g[i] * av[i];
          t.accumulate(pb, buf.data(), buf.size());
        }
      });
}

Tensor channel_mix(const Tensor& W, const Tensor& x) {
  if (W.shape.size() != 2 || x.shape.empty() || W.shape[1] != x.shape[0])
    throw std::invalid_argument("channel_mix: shape mismatch " +
                                shape_str(W.shape) + " vs " +
                                shape_str(x.shape));
  const std::size_t dout = W.shape[0];
  const std::size_t din = W.shape[1];
  const std::size_t grid = x.size() / din;
  Tape* tape = common_tape({&W, &x});

  std::vector<double> out(dout * grid, 0.0);
  for (std::size_t o = 0; o < dout; ++o)
    for (std::size_t i = 0; i < din; ++i) {
      const double w = W.v[o * din + i];
      if (w == 0.0) continue;
      const double* xp = &x.v[i * grid];
      double* yp = &out[o * grid];
      for (std::size_t p = 0; p < grid; ++p) yp[p] += w * xp[p];
    }

  std::vector<std::size_t> oshape = x.shape;
  oshape[0] = dout;
  const int pw = W.node, px = x.node;
  std::vector<double> wv = W.v, xv = x.v;
  return make_result(
      tape, std::move(oshape), std::move(out),
      [pw, px, dout, din, grid, wv = std::move(wv), xv = std::move(xv)](
          Tape& t, const std::vector<double>& g) {
        if (px >= 0) {
          std::vector<double> gx(din * grid, 0.0);
          for (std::size_t o = 0; o < dout; ++o)
            for (std::size_t i = 0; i < din; ++i) {
              const double w = wv[o * din + i];
              if (w == 0.0) continue;
              const double* gp = &g[o * grid];
              double* dst = &gx[i * grid];
              for (std::size_t p = 0; p < grid; ++p) dst[p] += w * gp[p];
            }
          t.accumulate(px, gx.data(), gx.size());
        }
        if (pw >= 0) {
          std::vector<double> gw(dout * din, 0.0);
          for (std::size_t o = 0; o < dout; ++o)
            for (std::size_t i = 0; i < din; ++i) {
              const double* gp = &g[o * grid];
              const double* xp = &xv[i * grid];
              double s = 0.0;
              for (std::size_t p = 0; p < grid; ++p) s += gp[p] * xp[p];
              gw[o * din + i] = s;
            }
          t.accumulate(pw, gw.data(), gw.size());
        }
      });
}

Tensor add_channel_bias(const Tensor& b, const Tensor& x) {
  if (b.shape.size() != 1 || x.shape.empty() || b.shape[0] != x.shape[0])
    throw std::invalid_argument("add_channel_bias: shape mismatch " +
                                shape_str(b.shape) + " vs " +
                                shape_str(x.shape));
  const std::size_t d = b.shape[0];
  const std::size_t grid = x.size() / d;
  Tape* tape = common_tape({&b, &x});
  std::vector<double> out(x.size());
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t p = 0; p < grid; ++p)
      out[c * grid + p] = x.v[c * grid + p] + b.v[c];
  const int pb = b.node, px = x.node;
  return make_result(tape, x.shape, std::move(out),
                     [pb, px, d, grid](Tape& t, const std::vector<double>& g) {
                       t.accumulate(px, g.data(), g.size());
                       if (pb >= 0) {
                         std::vector<double> gb(d, 0.0);
                         for (std::size_t c = 0; c < d; ++c)
                           for (std::size_t p = 0; p < grid; ++p)
                             gb[c] += g[c * grid + p];
                         t.accumulate(pb, gb.data(), gb.size());
                       }
                     });
}

namespace {
const double kInvSqrt2 = 0.70710678118654752440;
const double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

Tensor gelu(const Tensor& x) {
  Tape* tape = common_tape({&x});
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = 0.5 * x.v[i] * (1.0 + std::erf(x.v[i] * kInvSqrt2));
  const int px = x.node;
  std::vector<double> xv = x.v;
  return make_result(
      tape, x.shape, std::move(out),
      [px, xv = std::move(xv)](Tape& t, const std::vector<double>& g) {
        if (px < 0) return;
        std::vector<double> gx(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double cdf = 0.5 * (1.0 + std::erf(xv[i] * kInvSqrt2));
          const double pdf = kInvSqrt2Pi * std::exp(-0.5 * xv[i] * xv[i]);
          gx[i] = g[i] * (cdf + xv[i] * pdf);
        }
        t.accumulate(px, gx.data(), gx.size());
      });
}

Tensor sigmoid(const Tensor& x) {
  Tape* tape = common_tape({&x});
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = 1.0 / (1.0 + std::exp(-x.v[i]));
  const int px = x.node;
  std::vector<double> yv = out;
  return make_result(
      tape, x.shape, std::move(out),
      [px, yv = std::move(yv)](Tape& t, const std::vector<double>& g) {
        if (px < 0) return;
        std::vector<double> gx(g.size());
        for (std::size_t i = 0; i < g.size(); ++i)
          gx[i] = g[i] * yv[i] * (1.0 - yv[i]);
        t.accumulate(px, gx.data(), gx.size());
      });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias) {
  if (x.shape.empty())
    throw std::invalid_argument("layer_norm: input must have a channel axis");
  const std::size_t d = x.shape[0];
  if (gain.shape != std::vector<std::size_t>{d} ||
      bias.shape != std::vector<std::size_t>{d})
    throw std::invalid_argument("layer_norm: gain/bias must have shape [" +
                                std::to_string(d) + "], got " +
                                shape_str(gain.shape) + " and " +
                                shape_str(bias.shape));
  const std::size_t grid = x.size() / d;
  const double floor = 1e-5;
  Tape* tape = common_tape({&x, &gain, &bias});

  std::vector<double> out(x.size());
  std::vector<double> xhat(x.size());
  std::vector<double> inv_s(grid);
  std::vector<char> clamped(grid);
  for (std::size_t p = 0; p < grid; ++p) {
    double mu = 0.0;
    for (std::size_t c = 0; c < d; ++c) mu += x.v[c * grid + p];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double dv = x.v[c * grid + p] - mu;
      var += dv * dv;
    }
    var /= static_cast<double>(d);
    clamped[p] = var < floor;
    const double s = std::sqrt(clamped[p] ? floor : var);
    inv_s[p] = 1.0 / s;
    for (std::size_t c = 0; c < d; ++c) {
      const double xh = (x.v[c * grid + p] - mu) * inv_s[p];
      xhat[c * grid + p] = xh;
      out[c * grid + p] = gain.v[c] * xh + bias.v[c];
    }
  }

  const int px = x.node, pg = gain.node, pb = bias.node;
  std::vector<double> gv = gain.v;
  return make_result(
      tape, x.shape, std::move(out),
      [px, pg, pb, d, grid, gv = std::move(gv), xhat = std::move(xhat),
       inv_s = std::move(inv_s), clamped = std::move(clamped)](
          Tape& t, const std::vector<double>& g) {
        if (pg >= 0) {
          std::vector<double> gg(d, 0.0);
          for (std::size_t c = 0; c < d; ++c)
            for (std::size_t p = 0; p < grid; ++p)
              gg[c] += g[c * grid + p] * xhat[c * grid + p];
          t.accumulate(pg, gg.data(), gg.size());
        }
        if (pb >= 0) {
          std::vector<double> gb(d, 0.0);
          for (std::size_t c = 0; c < d; ++c)
            for (std::size_t p = 0; p < grid; ++p) gb[c] += g[c * grid + p];
          t.accumulate(pb, gb.data(), gb.size());
        }
        if (px >= 0) {
          std::vector<double> gx(g.size());
          for (std::size_t p = 0; p < grid; ++p) {
            double mean_dxh = 0.0, mean_dxh_xh = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
              const double dxh = g[c * grid + p] * gv[c];
              mean_dxh += dxh;
              mean_dxh_xh += dxh * xhat[c * grid + p];
            }
            mean_dxh /= static_cast<double>(d);
            mean_dxh_xh /= static_cast<double>(d);
            for (std::size_t c = 0; c < d; ++c) {
              const double dxh = g[c * grid + p] * gv[c];
              double v = dxh - mean_dxh;
              // At the variance floor the scale is constant, so the
              // curvature term drops.
              if (!clamped[p]) v -= xhat[c * grid + p] * mean_dxh_xh;
              gx[c * grid + p] = v * inv_s[p];
            }
          }
          t.accumulate(px, gx.data(), gx.size());
        }
      });
}

namespace {

// One channel: out = ifft(spec .* fft(x)) with optional conjugated spectrum.
void apply_spectrum(const double* x, double* out, std::size_t total,
                    const std::vector<std::size_t>& sshape,
                    const ComplexBuffer& spec, bool adjoint) {
  std::vector<double> re(x, x + total), im(total, 0.0);
  std::vector<std::size_t> axes(sshape.size());
  for (std::size_t i = 0; i < axes.size(); ++i) axes[i] = i;
  fft_nd_inplace(re, im, sshape, axes, false);
  for (std::size_t f = 0; f < total; ++f) {
    const double si = adjoint ? -spec.im[f] : spec.im[f];
    const double r = re[f] * spec.re[f] - im[f] * si;
    const double i2 = re[f] * si + im[f] * spec.re[f];
    re[f] = r;
    im[f] = i2;
  }
  fft_nd_inplace(re, im, sshape, axes, true);
  for (std::size_t f = 0; f < total; ++f) out[f] = re[f];
}

}  // namespace

Tensor conv_fixed(const Tensor& x, const std::vector<double>& filter,
                  const std::vector<std::size_t>& spatial_shape) {
  if (x.shape.size() != spatial_shape.size() + 1)
    throw std::invalid_argument("conv_fixed: input " + shape_str(x.shape) +
                                " does not match spatial shape " +
                                shape_str(spatial_shape));
  const std::size_t total = shape_size(spatial_shape);
  for (std::size_t a = 0; a < spatial_shape.size(); ++a)
    if (x.shape[a + 1] != spatial_shape[a])
      throw std::invalid_argument("conv_fixed: spatial axis mismatch");
  if (filter.size() != total)
    throw std::invalid_argument("conv_fixed: filter length mismatch");
  const std::size_t d = x.shape[0];
  Tape* tape = common_tape({&x});

  ComplexBuffer spec(total);
  spec.re = filter;
  {
    std::vector<std::size_t> axes(spatial_shape.size());
    for (std::size_t i = 0; i < axes.size(); ++i) axes[i] = i;
    fft_nd_inplace(spec.re, spec.im, spatial_shape, axes, false);
  }

  std::vector<double> out(x.size());
  for (std::size_t c = 0; c < d; ++c)
    apply_spectrum(&x.v[c * total], &out[c * total], total, spatial_shape,
                   spec, false);

  const int px = x.node;
  return make_result(
      tape, x.shape, std::move(out),
      [px, d, total, spatial_shape, spec = std::move(spec)](
          Tape& t, const std::vector<double>& g) {
        if (px < 0) return;
        // Adjoint of circular convolution is circular correlation.
        std::vector<double> gx(g.size());
        for (std::size_t c = 0; c < d; ++c)
          apply_spectrum(&g[c * total], &gx[c * total], total, spatial_shape,
                         spec, true);
        t.accumulate(px, gx.data(), gx.size());
      });
}

Tensor sum(const Tensor& x) {
  Tape* tape = common_tape({&x});
  double s = 0.0;
  for (double v : x.v) s += v;
  const int px = x.node;
  const std::size_t n = x.size();
  return make_result(tape, {}, {s},
                     [px, n](Tape& t, const std::vector<double>& g) {
                       if (px < 0) return;
                       std::vector<double> gx(n, g[0]);
                       t.accumulate(px, gx.data(), gx.size());
                     });
}

Tensor rel_l2_loss(const Tensor& pred, const Tensor& target) {
  require_same_shape("rel_l2_loss", pred, target);
  Tape* tape = common_tape({&pred, &target});
  double tnorm2 = 0.0, dnorm2 = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.v[i] - target.v[i];
    dnorm2 += d * d;
    tnorm2 += target.v[i] * target.v[i];
  }
  if (tnorm2 == 0.0)
    throw std::invalid_argument("rel_l2_loss: zero-norm target is undefined");
  const double tnorm = std::sqrt(tnorm2);
  const double dnorm = std::sqrt(dnorm2);
  const int pp = pred.node;
  std::vector<double> diff(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i)
    diff[i] = pred.v[i] - target.v[i];
  return make_result(
      tape, {}, {dnorm / tnorm},
      [pp, tnorm, dnorm, diff = std::move(diff)](
          Tape& t, const std::vector<double>& g) {
        if (pp < 0) return;
        std::vector<double> gp(diff.size(), 0.0);
        if (dnorm > 0.0) {
          const double f = g[0] / (dnorm * tnorm);
          for (std::size_t i = 0; i < diff.size(); ++i) gp[i] = f * diff[i];
        }
        t.accumulate(pp, gp.data(), gp.size());
      });
}

double grad_check(
    const std::function<Tensor(Tape&, std::vector<Tensor>&)>& build,
    std::vector<Tensor> inputs, double step) {
  if (step <= 0.0) throw std::invalid_argument("grad_check: step must be > 0");

  Tape tape;
  std::vector<Tensor> leaves;
  leaves.reserve(inputs.size());
  for (const Tensor& in : inputs) leaves.push_back(tape.leaf(in));
  Tensor loss = build(tape, leaves);
  tape.backward(loss);
  std::vector<std::vector<double>> analytic;
  for (const Tensor& l : leaves) analytic.push_back(tape.grad(l));

  const auto eval = [&](const std::vector<Tensor>& pts) {
    Tape t2;
    std::vector<Tensor> ls;
    for (const Tensor& in : pts) ls.push_back(t2.leaf(in));
    return build(t2, ls).v[0];
  };

  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      std::vector<Tensor> plus = inputs, minus = inputs;
      plus[k].v[i] += step;
      minus[k].v[i] -= step;
      const double numeric = (eval(plus) - eval(minus)) / (2.0 * step);
      const double a = analytic[k][i];
      const double dev = std::abs(a - numeric) / (std::abs(a) + 1e-8);
      worst = std::max(worst, dev);
    }
  }
  return worst;
}

}  // namespace sfo
