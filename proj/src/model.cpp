#include "sfo/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "sfo/util.hpp"

namespace sfo {

std::string to_string(Variant v) { return v == Variant::MLP ? "mlp" : "glu"; }

Variant variant_from_string(const std::string& s) {
  if (s == "mlp") return Variant::MLP;
  if (s == "glu") return Variant::GLU;
  throw std::invalid_argument("unknown variant: " + s);
}

std::size_t SFOConfig::grid_total() const {
  std::size_t t = 1;
  for (std::size_t g : grid) t *= g;
  return t;
}

std::string SFOConfig::to_json() const {
  nlohmann::json j;
  j["L"] = L;
  j["d"] = d;
  j["T"] = T;
  j["variant"] = to_string(variant);
  j["scheme"] = to_string(scheme);
  j["basis_kind"] = to_string(basis_kind);
  j["grid"] = grid;
  j["in_channels"] = in_channels;
  j["out_channels"] = out_channels;
  j["seed"] = seed;
  return j.dump();
}

SFOConfig SFOConfig::from_json(const std::string& json) {
  const auto j = nlohmann::json::parse(json);
  SFOConfig c;
  c.L = j.at("L").get<std::size_t>();
  c.d = j.at("d").get<std::size_t>();
  c.T = j.at("T").get<std::size_t>();
  c.variant = variant_from_string(j.at("variant").get<std::string>());
  c.scheme = index_scheme_from_string(j.at("scheme").get<std::string>());
  c.basis_kind = basis_kind_from_string(j.at("basis_kind").get<std::string>());
  c.grid = j.at("grid").get<std::vector<std::size_t>>();
  c.in_channels = j.at("in_channels").get<std::size_t>();
  c.out_channels = j.at("out_channels").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::vector<Tensor*> ModelParams::ordered() {
  std::vector<Tensor*> out{&p_w, &p_b};
  for (auto& l : layers) {
    for (auto& th : l.thetas) out.push_back(&th);
    out.push_back(&l.w1);
    out.push_back(&l.w2);
    out.push_back(&l.gain);
    out.push_back(&l.bias);
  }
  out.push_back(&q_w);
  out.push_back(&q_b);
  return out;
}

std::vector<const Tensor*> ModelParams::ordered() const {
  auto mut = const_cast<ModelParams*>(this)->ordered();
  return {mut.begin(), mut.end()};
}

double SFOModel::dx_total() const {
  double dx = 1.0;
  for (std::size_t g : cfg.grid) dx /= static_cast<double>(g);
  return dx;
}

namespace {

void validate_config(const SFOConfig& cfg) {
  if (cfg.grid.empty() || cfg.grid.size() > 3)
    throw std::invalid_argument("config: grid arity must be 1..3");
  for (std::size_t g : cfg.grid) {
    if (!is_power_of_two(g))
      throw std::invalid_argument("config: grid sizes must be powers of two");
    if (g != cfg.grid[0])
      throw std::invalid_argument("config: grid must be square");
  }
  if (cfg.T < 1) throw std::invalid_argument("config: T must be >= 1");
  if (cfg.d < 1) throw std::invalid_argument("config: d must be >= 1");
  if (cfg.L > cfg.grid[0])
    throw std::invalid_argument("config: L must not exceed the grid size");
}

Tensor gaussian_tensor(std::vector<std::size_t> shape, double stddev,
                       Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& x : t.v) x = stddev * rng.next_gaussian();
  return t;
}

}  // namespace

SFOModel init_model(const SFOConfig& cfg) {
  validate_config(cfg);
  SFOModel m;
  m.cfg = cfg;
  m.basis = build_basis(cfg.basis_kind, cfg.grid[0], cfg.L, cfg.seed);
  m.modes = extend_modes(m.basis, cfg.arity(), cfg.scheme);

  const std::size_t d = cfg.d;
  const std::size_t K = m.modes.K;
  Rng rng(derive_seed(cfg.seed, 0x5f0d));

  m.params.p_w = gaussian_tensor({d, cfg.in_channels},
                                 1.0 / std::sqrt(double(cfg.in_channels)), rng);
  m.params.p_b = Tensor::zeros({d});
  for (std::size_t t = 0; t < cfg.T; ++t) {
    LayerParams layer;
    const double theta_std = 1.0 / std::sqrt(double(K) * double(d));
    for (std::size_t k = 0; k < K; ++k)
      layer.thetas.push_back(gaussian_tensor({d, d}, theta_std, rng));
    layer.w1 = gaussian_tensor({d, d}, 1.0 / std::sqrt(double(d)), rng);
    layer.w2 = gaussian_tensor({d, d}, 1.0 / std::sqrt(double(d)), rng);
    layer.gain = Tensor::from({d}, std::vector<double>(d, 1.0));
    layer.bias = Tensor::zeros({d});
    m.params.layers.push_back(std::move(layer));
  }
  m.params.q_w = gaussian_tensor({cfg.out_channels, d},
                                 1.0 / std::sqrt(double(d)), rng);
  m.params.q_b = Tensor::zeros({cfg.out_channels});
  return m;
}

ModelParams taped_copy(const ModelParams& params, Tape& tape) {
  ModelParams out;
  out.p_w = tape.leaf(params.p_w);
  out.p_b = tape.leaf(params.p_b);
  for (const auto& l : params.layers) {
    LayerParams lp;
    for (const auto& th : l.thetas) lp.thetas.push_back(tape.leaf(th));
    lp.w1 = tape.leaf(l.w1);
    lp.w2 = tape.leaf(l.w2);
    lp.gain = tape.leaf(l.gain);
    lp.bias = tape.leaf(l.bias);
    out.layers.push_back(std::move(lp));
  }
  out.q_w = tape.leaf(params.q_w);
  out.q_b = tape.leaf(params.q_b);
  return out;
}

namespace {

struct FreqPairs {
  // Representative frequency indices f with f <= partner(f), plus partner map.
  std::vector<std::size_t> reps;
  std::vector<std::size_t> partner;
};

FreqPairs make_freq_pairs(std::size_t n, std::size_t arity) {
  std::size_t total = 1;
  for (std::size_t m = 0; m < arity; ++m) total *= n;
  FreqPairs fp;
  fp.partner.resize(total);
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t rem = f, p = 0, stride = 1;
    for (std::size_t m = arity; m-- > 0;) {
      const std::size_t coord = rem % n;
      rem /= n;
      p += ((n - coord) % n) * stride;
      stride *= n;
    }
    fp.partner[f] = p;
    if (f <= p) fp.reps.push_back(f);
  }
  return fp;
}

// Frequency-domain mode mixing: out[:, f] = sum_l Theta_l (phi_l_hat[f] *
// in[:, f]), exploiting Hermitian symmetry of real-signal spectra.
void mix_spectra(const double* inre, const double* inim, double* outre,
                 double* outim, std::size_t d, std::size_t total,
                 const ModeSet& modes, const std::vector<double>& th,
                 bool transpose_theta, bool conj_filter,
                 const FreqPairs& fp) {
  // Gather the representative frequencies into dense d x R blocks so the
  // per-mode mixing runs as contiguous multiply-accumulate rows.
  const std::size_t R = fp.reps.size();
  std::vector<double> wre(R), wim(R);
  std::vector<double> yre(d * R), yim(d * R);
  std::vector<double> ore(d * R, 0.0), oim(d * R, 0.0);
  for (std::size_t l = 0; l < modes.K; ++l) {
    for (std::size_t r = 0; r < R; ++r) {
      const std::size_t f = fp.reps[r];
      wre[r] = modes.spectra[l].re[f];
      wim[r] = conj_filter ? -modes.spectra[l].im[f] : modes.spectra[l].im[f];
    }
    for (std::size_t q = 0; q < d; ++q) {
      const double* ire = inre + q * total;
      const double* iim = inim + q * total;
      double* yr = &yre[q * R];
      double* yi = &yim[q * R];
      for (std::size_t r = 0; r < R; ++r) {
        const std::size_t f = fp.reps[r];
        yr[r] = wre[r] * ire[f] - wim[r] * iim[f];
        yi[r] = wre[r] * iim[f] + wim[r] * ire[f];
      }
    }
    const double* tl = &th[l * d * d];
    for (std::size_t p = 0; p < d; ++p) {
      double* __restrict orr = &ore[p * R];
      double* __restrict ori = &oim[p * R];
      for (std::size_t q = 0; q < d; ++q) {
        const double w = transpose_theta ? tl[q * d + p] : tl[p * d + q];
        const double* __restrict yr = &yre[q * R];
        const double* __restrict yi = &yim[q * R];
        for (std::size_t r = 0; r < R; ++r) {
          orr[r] += w * yr[r];
          ori[r] += w * yi[r];
        }
      }
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    double* outr = outre + c * total;
    double* outi = outim + c * total;
    const double* orr = &ore[c * R];
    const double* ori = &oim[c * R];
    for (std::size_t r = 0; r < R; ++r) {
      const std::size_t f = fp.reps[r];
      const std::size_t fstar = fp.partner[f];
      outr[f] = orr[r];
      outi[f] = ori[r];
      if (fstar != f) {
        outr[fstar] = orr[r];
        outi[fstar] = -ori[r];
      }
    }
  }
}

void fft_channels(const double* x, double* re, double* im, std::size_t d,
                  std::size_t total, const std::vector<std::size_t>& sshape,
                  const std::vector<std::size_t>& axes) {
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> lre(x + c * total, x + (c + 1) * total);
    std::vector<double> lim(total, 0.0);
    fft_nd_inplace(lre, lim, sshape, axes, false);
    std::copy(lre.begin(), lre.end(), re + c * total);
    std::copy(lim.begin(), lim.end(), im + c * total);
  }
}

void ifft_channels_real(const double* re, const double* im, double* out,
                        std::size_t d, std::size_t total, double scale,
                        const std::vector<std::size_t>& sshape,
                        const std::vector<std::size_t>& axes) {
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> lre(re + c * total, re + (c + 1) * total);
    std::vector<double> lim(im + c * total, im + (c + 1) * total);
    fft_nd_inplace(lre, lim, sshape, axes, true);
    for (std::size_t p = 0; p < total; ++p) out[c * total + p] = scale * lre[p];
  }
}

std::vector<double> flatten_thetas(const std::vector<Tensor>& thetas,
                                   std::size_t d, std::size_t K) {
  if (thetas.size() != K)
    throw std::invalid_argument("stu_apply: theta count does not match modes");
  std::vector<double> th(K * d * d);
  for (std::size_t l = 0; l < K; ++l) {
    if (thetas[l].shape != std::vector<std::size_t>{d, d})
      throw std::invalid_argument("stu_apply: Theta_" + std::to_string(l) +
                                  " has shape " + shape_str(thetas[l].shape));
    std::copy(thetas[l].v.begin(), thetas[l].v.end(), th.begin() + long(l * d * d));
  }
  return th;
}

}  // namespace

Tensor stu_apply(const Tensor& v, const std::vector<Tensor>& thetas,
                 const ModeSet& modes, double dx_total) {
  if (v.shape.size() != modes.arity + 1)
    throw std::invalid_argument("stu_apply: field " + shape_str(v.shape) +
                                " does not match mode arity " +
                                std::to_string(modes.arity));
  for (std::size_t m = 0; m < modes.arity; ++m)
    if (v.shape[m + 1] != modes.n)
      throw std::invalid_argument("stu_apply: grid size mismatch");
  const std::size_t d = v.shape[0];
  std::size_t total = 1;
  for (std::size_t m = 0; m < modes.arity; ++m) total *= modes.n;

  Tape* tape = nullptr;
  {
    std::vector<const Tensor*> all{&v};
    for (const Tensor& th : thetas) all.push_back(&th);
    for (const Tensor* t : all) {
      if (!t->on_tape()) continue;
      if (tape && tape != t->tape)
        throw std::runtime_error("stu_apply: tensors from different tapes");
      tape = t->tape;
    }
  }

  std::vector<std::size_t> sshape(modes.arity, modes.n);
  std::vector<std::size_t> axes(modes.arity);
  for (std::size_t m = 0; m < modes.arity; ++m) axes[m] = m;
  const FreqPairs fp = make_freq_pairs(modes.n, modes.arity);
  std::vector<double> th = flatten_thetas(thetas, d, modes.K);

  std::vector<double> vre(d * total), vim(d * total);
  fft_channels(v.v.data(), vre.data(), vim.data(), d, total, sshape, axes);

  std::vector<double> accre(d * total), accim(d * total);
  mix_spectra(vre.data(), vim.data(), accre.data(), accim.data(), d, total,
              modes, th, false, false, fp);

  std::vector<double> out(d * total);
  ifft_channels_real(accre.data(), accim.data(), out.data(), d, total,
                     dx_total, sshape, axes);

  Tensor result = Tensor::from(v.shape, std::move(out));
  if (!tape) return result;

  const int pv = v.node;
  std::vector<int> ptheta(modes.K);
  for (std::size_t l = 0; l < modes.K; ++l) ptheta[l] = thetas[l].node;
  const ModeSet* mp = &modes;  // owned by the model, outlives the tape

  result.tape = tape;
  result.node = tape->add_node(
      result.size(),
      [pv, ptheta, mp, d, total, dx_total, sshape, axes, fp,
       th = std::move(th), vre = std::move(vre), vim = std::move(vim)](
          Tape& t, const std::vector<double>& g) {
        std::vector<double> gre(d * total), gim(d * total);
        fft_channels(g.data(), gre.data(), gim.data(), d, total, sshape, axes);

        if (pv >= 0) {
          // Adjoint: transposed mixing with conjugated filter spectra.
          std::vector<double> zre(d * total), zim(d * total);
          mix_spectra(gre.data(), gim.data(), zre.data(), zim.data(), d,
                      total, *mp, th, true, true, fp);
          std::vector<double> gv(d * total);
          ifft_channels_real(zre.data(), zim.data(), gv.data(), d, total,
                             dx_total, sshape, axes);
          t.accumulate(pv, gv.data(), gv.size());
        }

        // dTheta_l[p][q] = dx/total * Re sum_f conj(g_hat_p) phi_hat_l v_hat_q
        // evaluated over representative frequencies (paired ones weighted 2x)
        // as one d x d contraction of gathered d x R blocks per mode.
        const double base = dx_total / static_cast<double>(total);
        const std::size_t R = fp.reps.size();
        std::vector<double> gwre(d * R), gwim(d * R);
        for (std::size_t p = 0; p < d; ++p)
          for (std::size_t r = 0; r < R; ++r) {
            const std::size_t f = fp.reps[r];
            const double weight = (fp.partner[f] == f) ? base : 2.0 * base;
            gwre[p * R + r] = weight * gre[p * total + f];
            gwim[p * R + r] = weight * gim[p * total + f];
          }
        std::vector<double> yre(d * R), yim(d * R), gtheta(d * d);
        for (std::size_t l = 0; l < mp->K; ++l) {
          if (ptheta[l] < 0) continue;
          for (std::size_t q = 0; q < d; ++q)
            for (std::size_t r = 0; r < R; ++r) {
              const std::size_t f = fp.reps[r];
              const double wr = mp->spectra[l].re[f];
              const double wi = mp->spectra[l].im[f];
              const double vr = vre[q * total + f];
              const double vi = vim[q * total + f];
              yre[q * R + r] = wr * vr - wi * vi;
              yim[q * R + r] = wr * vi + wi * vr;
            }
          for (std::size_t p = 0; p < d; ++p) {
            const double* __restrict gr = &gwre[p * R];
            const double* __restrict gi = &gwim[p * R];
            double* __restrict row = &gtheta[p * d];
            for (std::size_t q = 0; q < d; ++q) {
              const double* __restrict yr = &yre[q * R];
              const double* __restrict yi = &yim[q * R];
              double acc = 0.0;
              for (std::size_t r = 0; r < R; ++r)
                acc += gr[r] * yr[r] + gi[r] * yi[r];
              row[q] = acc;
            }
          }
          t.accumulate(ptheta[l], gtheta.data(), gtheta.size());
        }
      });
  return result;
}

Tensor layer_forward(const Tensor& v, const LayerParams& layer,
                     const ModeSet& modes, double dx_total, Variant variant) {
  if (variant == Variant::MLP) {
    Tensor normed = layer_norm(v, layer.gain, layer.bias);
    Tensor k = stu_apply(normed, layer.thetas, modes, dx_total);
    Tensor update = channel_mix(layer.w2, gelu(channel_mix(layer.w1, k)));
    return add(v, update);
  }
  // GLU path applies the operator to the raw latent field (no normalization).
  Tensor k = stu_apply(v, layer.thetas, modes, dx_total);
  Tensor gate = sigmoid(channel_mix(layer.w1, k));
  Tensor value = channel_mix(layer.w2, k);
  return add(v, mul(gate, value));
}

Tensor model_forward(const SFOConfig& cfg, const ModeSet& modes,
                     const ModelParams& params, const Tensor& a) {
  if (a.shape.empty() || a.shape[0] != cfg.in_channels)
    throw std::invalid_argument(
        "model_forward: input has " + shape_str(a.shape) + ", expected " +
        std::to_string(cfg.in_channels) + " channels");
  double dx = 1.0;
  for (std::size_t g : cfg.grid) dx /= static_cast<double>(g);
  Tensor v = add_channel_bias(params.p_b, channel_mix(params.p_w, a));
  for (const auto& layer : params.layers)
    v = layer_forward(v, layer, modes, dx, cfg.variant);
  return add_channel_bias(params.q_b, channel_mix(params.q_w, v));
}

Tensor model_forward(const SFOModel& model, const Tensor& a) {
  return model_forward(model.cfg, model.modes, model.params, a);
}

std::size_t count_params(const SFOConfig& cfg) {
  std::size_t K = cfg.L;
  if (cfg.scheme == IndexScheme::Multi) {
    K = 1;
    for (std::size_t m = 0; m < cfg.arity(); ++m) K *= cfg.L;
  }
  const std::size_t d = cfg.d;
  const std::size_t lift = cfg.in_channels * d + d;
  const std::size_t per_layer = K * d * d + 2 * d * d + 2 * d;
  const std::size_t proj = d * cfg.out_channels + cfg.out_channels;
  return lift + cfg.T * per_layer + proj;
}

Matrix materialize_kernel(const std::vector<Tensor>& thetas,
                          const SpectralBasis& basis) {
  const std::size_t n = basis.n;
  if (n > 128)
    throw std::invalid_argument("materialize_kernel: guarded to n <= 128");
  if (thetas.empty())
    throw std::invalid_argument("materialize_kernel: no mixing matrices");
  const std::size_t d = thetas[0].shape[0];
  const double dx = 1.0 / static_cast<double>(n);

  Matrix M(n * d, n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t off = (i + n - j) % n;
      for (std::size_t l = 0; l < thetas.size(); ++l) {
        const double phi = basis.filters(off, l) * dx;
        if (phi == 0.0) continue;
        for (std::size_t p = 0; p < d; ++p)
          for (std::size_t q = 0; q < d; ++q)
            M(i * d + p, j * d + q) += thetas[l].v[p * d + q] * phi;
      }
    }
  }
  return M;
}

SFOModel rebuild_for_resolution(const SFOModel& model, std::size_t n2) {
  if (!is_power_of_two(n2))
    throw std::invalid_argument("rebuild_for_resolution: n' must be a power of two");
  const std::size_t L2 = std::min(model.cfg.L, n2);

  SFOModel out;
  out.cfg = model.cfg;
  out.cfg.grid.assign(model.cfg.arity(), n2);
  out.cfg.L = L2;
  out.basis = build_basis(model.cfg.basis_kind, n2, L2, model.cfg.seed);
  out.modes = extend_modes(out.basis, out.cfg.arity(), out.cfg.scheme);

  out.params.p_w = model.params.p_w;
  out.params.p_b = model.params.p_b;
  out.params.q_w = model.params.q_w;
  out.params.q_b = model.params.q_b;
  for (const auto& l : model.params.layers) {
    LayerParams lp;
    if (out.cfg.scheme == IndexScheme::Tied) {
      for (std::size_t k = 0; k < L2; ++k) lp.thetas.push_back(l.thetas[k]);
    } else {
      // Keep only tuples whose indices all survive the cap; new order is
      // lexicographic over the retained indices.
      const std::size_t M = out.cfg.arity();
      const std::size_t L = model.cfg.L;
      std::size_t K2 = 1;
      for (std::size_t m = 0; m < M; ++m) K2 *= L2;
      for (std::size_t k2 = 0; k2 < K2; ++k2) {
        std::size_t rem = k2, old_index = 0;
        std::vector<std::size_t> idx(M);
        for (std::size_t m = M; m-- > 0;) {
          idx[m] = rem % L2;
          rem /= L2;
        }
        for (std::size_t m = 0; m < M; ++m) old_index = old_index * L + idx[m];
        lp.thetas.push_back(l.thetas[old_index]);
      }
    }
    lp.w1 = l.w1;
    lp.w2 = l.w2;
    lp.gain = l.gain;
    lp.bias = l.bias;
    out.params.layers.push_back(std::move(lp));
  }
  return out;
}

std::vector<double> coefficient_norms(const SFOModel& model) {
  const std::size_t K = model.modes.K;
  std::vector<double> norms(K, 0.0);
  for (const auto& l : model.params.layers)
    for (std::size_t k = 0; k < K; ++k) {
      double s = 0.0;
      for (double x : l.thetas[k].v) s += x * x;
      norms[k] += std::sqrt(s);
    }
  for (double& x : norms) x /= static_cast<double>(model.params.layers.size());
  return norms;
}

void save_checkpoint(const SFOModel& model, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write("SFO1", 4);
  const std::string cfg = model.cfg.to_json();
  write_pod<std::uint64_t>(f, cfg.size());
  f.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  for (const Tensor* t : model.params.ordered()) {
    write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(t->shape.size()));
    for (std::size_t dim : t->shape)
      write_pod<std::uint64_t>(f, static_cast<std::uint64_t>(dim));
    write_f64_array(f, t->v);
  }
  if (!f) throw std::runtime_error("checkpoint write failed: " + path);
}

SFOModel load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::string(magic, 4) != "SFO1")
    throw std::runtime_error("bad checkpoint magic in " + path);
  const auto len = read_pod<std::uint64_t>(f, "config length");
  std::string cfg_json(len, '\0');
  f.read(cfg_json.data(), static_cast<std::streamsize>(len));
  if (!f) throw std::runtime_error("truncated checkpoint config in " + path);

  SFOModel model = init_model(SFOConfig::from_json(cfg_json));
  for (Tensor* t : model.params.ordered()) {
    const auto ndim = read_pod<std::uint32_t>(f, "tensor rank");
    std::vector<std::size_t> shape(ndim);
    for (auto& dim : shape)
      dim = static_cast<std::size_t>(read_pod<std::uint64_t>(f, "tensor dim"));
    if (shape != t->shape)
      throw std::runtime_error("checkpoint tensor shape mismatch in " + path);
    read_f64_array(f, t->v, "tensor payload");
  }
  return model;
}

namespace ref {

Tensor stu_apply_direct(const Tensor& v, const std::vector<Tensor>& thetas,
                        const ModeSet& modes, double dx_total) {
  const std::size_t d = v.shape[0];
  std::size_t total = 1;
  for (std::size_t m = 0; m < modes.arity; ++m) total *= modes.n;
  const std::size_t n = modes.n;
  const std::size_t M = modes.arity;

  Tensor out = Tensor::zeros(v.shape);
  std::vector<double> conv(total);
  for (std::size_t l = 0; l < modes.K; ++l) {
    const auto& filt = modes.filters[l];
    for (std::size_t q = 0; q < d; ++q) {
      // conv[i] = sum_j filt[(i-j) mod n per axis] v[q, j]
      for (std::size_t i = 0; i < total; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < total; ++j) {
          std::size_t ri = i, rj = j, off = 0, stride = 1;
          for (std::size_t m = M; m-- > 0;) {
            const std::size_t ci = ri % n, cj = rj % n;
            ri /= n;
            rj /= n;
            off += ((ci + n - cj) % n) * stride;
            stride *= n;
          }
          s += filt[off] * v.v[q * total + j];
        }
        conv[i] = s;
      }
      for (std::size_t p = 0; p < d; ++p) {
        const double w = thetas[l].v[p * d + q] * dx_total;
        if (w == 0.0) continue;
        for (std::size_t i = 0; i < total; ++i)
          out.v[p * total + i] += w * conv[i];
      }
    }
  }
  return out;
}

}  // namespace ref

}  // namespace sfo
