// Acceptance gate: twelve numbered criteria, one PASS/FAIL line each.
// Usage: acceptance [--only N [N...]]  (default: run all)
// Exit code is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "sfo/basis.hpp"
#include "sfo/data.hpp"
#include "sfo/fft.hpp"
#include "sfo/matrix.hpp"
#include "sfo/model.hpp"
#include "sfo/tensor.hpp"
#include "sfo/theory.hpp"
#include "sfo/train.hpp"
#include "sfo/util.hpp"

using namespace sfo;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed,
                     double scale = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  Rng rng(seed);
  for (double& x : t.v) x = scale * rng.next_gaussian();
  return t;
}

// ---------------------------------------------------------------------------
// 1. Basis orthonormality and eigenvalue collapse.

Outcome criterion1() {
  const std::vector<BasisKind> kinds{BasisKind::USB, BasisKind::Fourier,
                                     BasisKind::Chebyshev,
                                     BasisKind::RandomOrthogonal};
  double worst = 0.0;
  for (auto [n, L] : std::vector<std::pair<std::size_t, std::size_t>>{
           {64, 16}, {256, 20}}) {
    for (BasisKind kind : kinds) {
      const SpectralBasis b = build_basis(kind, n, L, 5);
      for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < L; ++j) {
          double dot = 0.0;
          for (std::size_t t = 0; t < n; ++t)
            dot += b.filters(t, i) * b.filters(t, j);
          worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
        }
    }
  }
  const SpectralBasis usb = build_basis(BasisKind::USB, 256, 20);
  const double ratio = usb.eigenvalues[19] / usb.eigenvalues[0];
  const bool pass = worst <= 1e-10 && ratio < 1e-9;
  return {pass, "max orthonormality defect " + num(worst) +
                    ", eigenvalue ratio " + num(ratio)};
}

// ---------------------------------------------------------------------------
// 2. FFT path vs direct-sum oracles.

Outcome criterion2() {
  double worst_conv = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const std::size_t n = std::size_t(16) << (seed % 4);  // 16..128
    std::vector<double> u(n), k(n);
    for (double& x : u) x = rng.next_gaussian();
    for (double& x : k) x = rng.next_gaussian();
    const std::vector<double> fast = circular_convolve(u, k);
    const std::vector<double> slow = ref::circular_convolve_direct(u, k);
    for (std::size_t i = 0; i < n; ++i)
      worst_conv = std::max(worst_conv, std::abs(fast[i] - slow[i]));
  }

  const std::size_t n = 64, d = 4, L = 8;
  const SpectralBasis b = build_basis(BasisKind::USB, n, L);
  const ModeSet ms = extend_modes(b, 1, IndexScheme::Tied);
  std::vector<Tensor> thetas;
  for (std::size_t l = 0; l < L; ++l)
    thetas.push_back(random_tensor({d, d}, 100 + l));
  const Tensor v = random_tensor({d, n}, 200);
  const Tensor fast = stu_apply(v, thetas, ms, 1.0 / double(n));
  const Tensor slow = ref::stu_apply_direct(v, thetas, ms, 1.0 / double(n));
  double worst_stu = 0.0;
  for (std::size_t i = 0; i < fast.size(); ++i)
    worst_stu = std::max(worst_stu, std::abs(fast.v[i] - slow.v[i]));

  const std::size_t n2 = 32, d2 = 2, L2 = 4;
  const SpectralBasis b2 = build_basis(BasisKind::USB, n2, L2);
  const ModeSet ms2 = extend_modes(b2, 1, IndexScheme::Tied);
  std::vector<Tensor> th2;
  for (std::size_t l = 0; l < L2; ++l)
    th2.push_back(random_tensor({d2, d2}, 300 + l));
  const Matrix M = materialize_kernel(th2, b2);
  const Tensor v2 = random_tensor({d2, n2}, 301);
  const Tensor y2 = stu_apply(v2, th2, ms2, 1.0 / double(n2));
  double worst_mat = 0.0;
  for (std::size_t i = 0; i < n2; ++i)
    for (std::size_t p = 0; p < d2; ++p) {
      double s = 0.0;
      for (std::size_t j = 0; j < n2; ++j)
        for (std::size_t q = 0; q < d2; ++q)
          s += M(i * d2 + p, j * d2 + q) * v2.v[q * n2 + j];
      worst_mat = std::max(worst_mat, std::abs(s - y2.v[p * n2 + i]));
    }

  const bool pass = worst_conv <= 1e-10 && worst_stu <= 1e-10 &&
                    worst_mat <= 1e-9;
  return {pass, "conv " + num(worst_conv) + ", operator " + num(worst_stu) +
                    ", dense " + num(worst_mat)};
}

// ---------------------------------------------------------------------------
// 3. Gradient checks over every primitive and a full layer, 20 seeds.

Outcome criterion3() {
  const std::size_t d = 3, n = 8, L = 2;
  const SpectralBasis b = build_basis(BasisKind::USB, n, L);
  const ModeSet ms = extend_modes(b, 1, IndexScheme::Tied);
  const double dx = 1.0 / double(n);
  std::vector<double> filter(n, 0.0);
  filter[0] = 0.6;
  filter[1] = -0.3;
  filter[3] = 0.1;

  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::uint64_t o = 1000 * (s + 1);
    auto chk = [&](auto build, std::vector<Tensor> inputs) {
      worst = std::max(worst, grad_check(build, std::move(inputs), 1e-5));
    };
    chk([](Tape&, std::vector<Tensor>& in) {
          return sum(mul(add(in[0], in[1]), in[0]));
        },
        {random_tensor({d, n}, o), random_tensor({d, n}, o + 1)});
    chk([](Tape&, std::vector<Tensor>& in) {
          return sum(mul(scale(in[0], 1.7), in[1]));
        },
        {random_tensor({d, n}, o + 2), random_tensor({d, n}, o + 3)});
    chk([](Tape&, std::vector<Tensor>& in) {
          return sum(mul(gelu(in[0]), in[1]));
        },
        {random_tensor({d, n}, o + 4), random_tensor({d, n}, o + 5)});
    chk([](Tape&, std::vector<Tensor>& in) {
          return sum(mul(sigmoid(in[0]), in[1]));
        },
        {random_tensor({d, n}, o + 6), random_tensor({d, n}, o + 7)});
    chk([](Tape&, std::vector<Tensor>& in) {
          return sum(mul(channel_mix(in[0], in[1]), in[2]));
        },
        {random_tensor({d, d}, o + 8), random_tensor({d, n}, o + 9),
         random_tensor({d, n}, o + 10)});
    chk([](Tape&, std::vector<Tensor>& in) {
          return sum(mul(add_channel_bias(in[0], in[1]), in[1]));
        },
        {random_tensor({d}, o + 11), random_tensor({d, n}, o + 12)});
    chk([](Tape&, std::vector<Tensor>& in) {
          return sum(mul(layer_norm(in[0], in[1], in[2]), in[0]));
        },
        {random_tensor({d, n}, o + 13), random_tensor({d}, o + 14, 0.3),
         random_tensor({d}, o + 15, 0.3)});
    chk([&](Tape&, std::vector<Tensor>& in) {
          return sum(mul(conv_fixed(in[0], filter, {n}), in[1]));
        },
        {random_tensor({d, n}, o + 16), random_tensor({d, n}, o + 17)});
    chk([](Tape&, std::vector<Tensor>& in) {
          return rel_l2_loss(in[0], in[1]);
        },
        {random_tensor({d, n}, o + 18), random_tensor({d, n}, o + 19)});
    chk([&](Tape&, std::vector<Tensor>& in) {
          const Tensor k = stu_apply(in[0], {in[1], in[2]}, ms, dx);
          return sum(mul(k, k));
        },
        {random_tensor({d, n}, o + 20), random_tensor({d, d}, o + 21),
         random_tensor({d, d}, o + 22)});
    for (Variant variant : {Variant::MLP, Variant::GLU}) {
      chk([&](Tape&, std::vector<Tensor>& in) {
            LayerParams layer;
            layer.thetas = {in[1], in[2]};
            layer.w1 = in[3];
            layer.w2 = in[4];
            layer.gain = in[5];
            layer.bias = in[6];
            const Tensor out = layer_forward(in[0], layer, ms, dx, variant);
            return sum(mul(out, out));
          },
          {random_tensor({d, n}, o + 23), random_tensor({d, d}, o + 24),
           random_tensor({d, d}, o + 25), random_tensor({d, d}, o + 26),
           random_tensor({d, d}, o + 27), random_tensor({d}, o + 28, 0.3),
           random_tensor({d}, o + 29, 0.3)});
    }
  }
  return {worst <= 1e-5, "max relative gradient deviation " + num(worst)};
}

// ---------------------------------------------------------------------------
// 4. Stencil kernel theory: closed form, impulse residual, truncation decay.

Outcome criterion4() {
  std::vector<StencilSpec> specs{
      scalar_stencil(2.5, 1.0), scalar_stencil(3.0, 1.0),
      scalar_stencil(3.0, -1.0), scalar_stencil(2.2, 1.05),
      scalar_stencil(5.0, 0.5)};
  {
    const double c = std::sqrt(0.5);
    Matrix U(2, 2);
    U(0, 0) = c; U(0, 1) = -c; U(1, 0) = c; U(1, 1) = c;
    specs.push_back(make_stencil(U, {2.5, 3.0}, {1.0, 1.0}));
  }

  double worst_cn = 0.0, worst_imp = 0.0;
  for (const StencilSpec& spec : specs) {
    const std::size_t tmax = 20;
    const GreensKernel closed = greens_closed_form(spec, tmax);
    const GreensKernel numeric = greens_numeric(spec, 2 * tmax + 41, tmax);
    for (long t = -long(tmax); t <= long(tmax); ++t)
      for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = 0; j < spec.d; ++j)
          worst_cn = std::max(
              worst_cn, std::abs(closed.at(t)(i, j) - numeric.at(t)(i, j)));

    // impulse equation: A1 G[t-1] + A0 G[t] + A1 G[t+1] = delta(t) I
    const GreensKernel g = greens_closed_form(spec, 12);
    const Matrix A0 = spec.a0(), A1 = spec.a1();
    for (long t = -10; t <= 10; ++t)
      for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = 0; j < spec.d; ++j) {
          double s = 0.0;
          for (std::size_t k = 0; k < spec.d; ++k)
            s += A1(i, k) * g.at(t - 1)(k, j) + A0(i, k) * g.at(t)(k, j) +
                 A1(i, k) * g.at(t + 1)(k, j);
          const double want = (t == 0 && i == j) ? 1.0 : 0.0;
          worst_imp = std::max(worst_imp, std::abs(s - want));
        }
  }

  // truncation decay on each scalar kernel profile
  const SpectralBasis usb = build_basis(BasisKind::USB, 256, 28);
  double worst_ratio = 0.0;
  for (const StencilSpec& spec : specs) {
    if (spec.d != 1) continue;
    const std::vector<double> prof = greens_kernel_profile(spec, 256);
    double prev = -1.0;
    for (std::size_t L = 4; L <= 24; L += 4) {
      const double err = project_truncate(prof, usb, L).rel_error;
      if (prev > 1e-12 && err > 1e-12)
        worst_ratio = std::max(worst_ratio, err / prev);
      prev = err;
    }
  }

  // USB vs seeded random basis at L=20 on the rho=0.9 geometric profile
  const std::vector<double> geo = kernel_profile(1.0, 0.9, 256);
  const double usb_err = project_truncate(geo, usb, 20).rel_error;
  const SpectralBasis rnd =
      build_basis(BasisKind::RandomOrthogonal, 256, 20, 7);
  const double rnd_err = project_truncate(geo, rnd, 20).rel_error;
  const double advantage = rnd_err / usb_err;

  const bool pass = worst_cn <= 1e-8 && worst_imp <= 1e-10 &&
                    worst_ratio <= 0.9 && advantage >= 10.0;
  return {pass, "closed-vs-numeric " + num(worst_cn) + ", impulse " +
                    num(worst_imp) + ", decay ratio " + num(worst_ratio) +
                    ", advantage " + num(advantage) + "x"};
}

// ---------------------------------------------------------------------------
// 5. Logarithmic mode complexity with frozen golden values.

Outcome criterion5() {
  const StencilSpec spec = scalar_stencil(2.5, 1.0);
  const std::vector<double> envelope = greens_decay_profile(spec, 256);
  const SpectralBasis usb = build_basis(BasisKind::USB, 256, 64);
  const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  const auto rows = modes_for_accuracy(envelope, usb, eps);

  // golden values frozen from the first oracle run of this projection
  const std::vector<std::size_t> golden{4, 7, 10, 13, 16, 19};
  bool golden_ok = rows.size() == golden.size();
  bool monotone = true;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].saturated) golden_ok = false;
    if (golden_ok && rows[i].L != golden[i]) golden_ok = false;
    if (i > 0 && rows[i].L < rows[i - 1].L) monotone = false;
    xs.push_back(std::log10(1.0 / rows[i].eps));
    ys.push_back(double(rows[i].L));
  }
  const LineFit fit = fit_line(xs, ys);
  const bool pass = golden_ok && monotone && fit.slope > 0.0 &&
                    fit.r_squared >= 0.9;
  std::string ls;
  for (const auto& r : rows) ls += std::to_string(r.L) + " ";
  return {pass, "L(eps) = " + ls + ", slope " + num(fit.slope) + ", R^2 " +
                    num(fit.r_squared)};
}

// ---------------------------------------------------------------------------
// 6/9 shared state: the desk-scale trained model.

struct DeskRun {
  Dataset ds;
  SFOModel model;
  TrainResult result;
  TrainConfig tcfg;
};

DeskRun& desk_run() {
  static DeskRun* run = [] {
    auto* r = new DeskRun;
    std::cerr << "[desk] generating diffusion-reaction dataset...\n";
    r->ds = gen_diffusion_reaction_1d(64, 16, 512, 0);
    SFOConfig cfg;
    cfg.L = 16;
    cfg.d = 32;
    cfg.T = 4;
    cfg.grid = {64};
    cfg.in_channels = 2;
    cfg.out_channels = 16;
    cfg.seed = 0;
    r->model = init_model(cfg);
    r->tcfg = TrainConfig{};
    r->tcfg.seed = 0;
    std::cerr << "[desk] training 200 epochs (progress on stderr)...\n";
    const auto t0 = std::chrono::steady_clock::now();
    r->result = train(r->model, r->ds, r->tcfg);
    const auto t1 = std::chrono::steady_clock::now();
    std::cerr << "[desk] trained in "
              << std::chrono::duration<double>(t1 - t0).count() << " s, val "
              << r->result.history.back().val_rel_l2 << "%\n";
    return r;
  }();
  return *run;
}

// Zero-layer Q.P baseline: the same lift/project affine map without any
// spectral layers, trained under the identical protocol.
double baseline_val(const Dataset& ds, std::uint64_t seed) {
  SFOConfig cfg;
  cfg.L = 16;
  cfg.d = 32;
  cfg.T = 1;
  cfg.grid = {64};
  cfg.in_channels = 2;
  cfg.out_channels = 16;
  cfg.seed = seed;
  SFOModel init = init_model(cfg);
  Tensor pw = init.params.p_w, pb = init.params.p_b;
  Tensor qw = init.params.q_w, qb = init.params.q_b;
  std::vector<Tensor*> params{&pw, &pb, &qw, &qb};
  AdamState st = AdamState::init(params);
  std::vector<std::size_t> tr, va;
  split_indices(ds.N, 0.9, seed, tr, va);
  const std::size_t total = ds.grid.total();
  auto fwd = [&](const Tensor& pwt, const Tensor& pbt, const Tensor& qwt,
                 const Tensor& qbt, const Tensor& a) {
    return add_channel_bias(
        qbt, channel_mix(qwt, add_channel_bias(pbt, channel_mix(pwt, a))));
  };
  std::vector<std::vector<double>> grads;
  for (Tensor* p : params) grads.emplace_back(p->size(), 0.0);
  for (std::size_t epoch = 0; epoch < 200; ++epoch) {
    std::vector<std::size_t> order = tr;
    Rng rng(derive_seed(seed, 1000 + epoch));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.next_u64() % i]);
    for (std::size_t start = 0; start < order.size(); start += 32) {
      const std::size_t stop = std::min(order.size(), start + 32);
      for (auto& g : grads) std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t i = start; i < stop; ++i) {
        Tape tape;
        Tensor pwt = tape.leaf(pw), pbt = tape.leaf(pb);
        Tensor qwt = tape.leaf(qw), qbt = tape.leaf(qb);
        const double* s = ds.input(order[i]);
        const Tensor a = Tensor::from(
            {ds.c_a, total}, std::vector<double>(s, s + ds.c_a * total));
        const double* t = ds.target(order[i]);
        const Tensor tgt = Tensor::from(
            {ds.c_u, total}, std::vector<double>(t, t + ds.c_u * total));
        const Tensor loss = rel_l2_loss(fwd(pwt, pbt, qwt, qbt, a), tgt);
        tape.backward(loss);
        const Tensor* tl[4] = {&pwt, &pbt, &qwt, &qbt};
        for (int k = 0; k < 4; ++k) {
          const auto& g = tape.grad(*tl[k]);
          for (std::size_t e = 0; e < g.size(); ++e) grads[k][e] += g[e];
        }
      }
      const double inv = 1.0 / double(stop - start);
      for (auto& g : grads)
        for (double& x : g) x *= inv;
      adam_step(params, grads, st, 1e-3);
    }
  }
  double acc = 0.0;
  for (std::size_t j : va) {
    const double* s = ds.input(j);
    const Tensor a = Tensor::from({ds.c_a, total},
                                  std::vector<double>(s, s + ds.c_a * total));
    const Tensor pred = fwd(pw, pb, qw, qb, a);
    const double* t = ds.target(j);
    double nu = 0.0, de = 0.0;
    for (std::size_t i = 0; i < ds.c_u * total; ++i) {
      const double dd = pred.v[i] - t[i];
      nu += dd * dd;
      de += t[i] * t[i];
    }
    acc += std::sqrt(nu / de);
  }
  return 100.0 * acc / double(va.size());
}

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  DeskRun& run = desk_run();
  const double val = run.result.history.back().val_rel_l2;
  std::cerr << "[desk] training Q.P baseline...\n";
  const double base = baseline_val(run.ds, 0);
  const auto t1 = std::chrono::steady_clock::now();
  const double secs = std::chrono::duration<double>(t1 - t0).count();
  const bool pass = !run.result.diverged && val < 5.0 && base >= 2.0 * val &&
                    secs < 900.0;
  return {pass, "val " + num(val) + "%, baseline " + num(base) + "%, " +
                    num(secs) + " s"};
}

// ---------------------------------------------------------------------------
// 7. Rank-sweep shape over 3 seeds.

Outcome criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset ds = gen_diffusion_reaction_1d(64, 16, 256, 1);
  SFOConfig base;
  base.L = 16;
  base.d = 32;
  base.T = 4;
  base.grid = {64};
  base.in_channels = 2;
  base.out_channels = 16;
  TrainConfig tcfg;
  tcfg.epochs = 30;
  const auto rows = sweep_rank(base, tcfg, ds, {4, 8, 16}, {0, 1, 2});
  std::map<std::string, std::pair<double, int>> agg;
  for (const auto& r : rows) {
    agg[r.value].first += r.val_rel_l2;
    agg[r.value].second += 1;
  }
  const double m4 = agg["4"].first / agg["4"].second;
  const double m16 = agg["16"].first / agg["16"].second;
  const auto t1 = std::chrono::steady_clock::now();
  const double secs = std::chrono::duration<double>(t1 - t0).count();
  const bool pass = m16 <= 1.10 * m4 && secs < 2700.0;
  return {pass, "mean val L=4 " + num(m4) + "%, L=16 " + num(m16) + "%, " +
                    num(secs) + " s"};
}

// ---------------------------------------------------------------------------
// 8. Tied vs multi-index parameter accounting plus 2D training smoke.

Outcome criterion8() {
  SFOConfig cfg;
  cfg.L = 6;
  cfg.d = 8;
  cfg.T = 3;
  cfg.grid = {32, 32};
  cfg.in_channels = 3;
  cfg.out_channels = 8;
  cfg.scheme = IndexScheme::Tied;
  const std::size_t tied = count_params(cfg);
  cfg.scheme = IndexScheme::Multi;
  const std::size_t multi = count_params(cfg);
  const bool exact = (multi - tied) == cfg.T * 30 * cfg.d * cfg.d;

  const Dataset ds = gen_heat_2d(32, 8, 32, 2);
  TrainConfig tcfg;
  tcfg.epochs = 2;
  tcfg.batch = 8;
  tcfg.seed = 2;
  bool trained = true;
  std::string err;
  for (IndexScheme scheme : {IndexScheme::Tied, IndexScheme::Multi}) {
    try {
      cfg.scheme = scheme;
      cfg.seed = 2;
      SFOModel model = init_model(cfg);
      const TrainResult r = train(model, ds, tcfg);
      if (r.history.empty() || !std::isfinite(r.history.back().val_rel_l2))
        trained = false;
    } catch (const std::exception& e) {
      trained = false;
      err = e.what();
    }
  }
  return {exact && trained,
          "multi - tied = " + std::to_string(multi - tied) + " (T*30*d^2 = " +
              std::to_string(cfg.T * 30 * cfg.d * cfg.d) + ")" +
              (err.empty() ? std::string(", 2D training ok")
                           : ", error: " + err)};
}

// ---------------------------------------------------------------------------
// 9. Resolution transfer with mode capping.

Outcome criterion9() {
  DeskRun& run = desk_run();
  const double native =
      evaluate_subset(run.model, run.ds, run.result.val_indices).rel_l2;
  std::vector<std::size_t> tr, va;
  split_indices(run.ds.N, run.tcfg.split, run.tcfg.seed, tr, va);

  double coarse2 = 0.0;
  bool ok = true;
  std::size_t modes_at_8 = 0, thetas_at_8 = 0;
  std::string err;
  try {
    for (std::size_t s : {std::size_t(2), std::size_t(4), std::size_t(8)}) {
      const Dataset sub = subsample(run.ds, s);
      const SFOModel coarse =
          rebuild_for_resolution(run.model, sub.grid.sizes[0]);
      std::vector<double> truths, preds;
      double acc = 0.0;
      for (std::size_t j : va) {
        const std::size_t total = sub.grid.total();
        const double* in = sub.input(j);
        const Tensor a = Tensor::from(
            {sub.c_a, total}, std::vector<double>(in, in + sub.c_a * total));
        const Tensor p = model_forward(coarse, a);
        const double* t = sub.target(j);
        double nu = 0.0, de = 0.0;
        for (std::size_t i = 0; i < sub.c_u * total; ++i) {
          const double dd = p.v[i] - t[i];
          nu += dd * dd;
          de += t[i] * t[i];
        }
        acc += std::sqrt(nu / de);
      }
      const double rel = 100.0 * acc / double(va.size());
      if (!std::isfinite(rel)) ok = false;
      if (s == 2) coarse2 = rel;
      if (s == 8) {
        modes_at_8 = coarse.modes.K;
        thetas_at_8 = coarse.params.layers[0].thetas.size();
      }
      std::cerr << "[transfer] stride " << s << ": rel_l2 " << rel << "%\n";
    }
  } catch (const std::exception& e) {
    ok = false;
    err = e.what();
  }
  const bool capped = modes_at_8 == 8 && thetas_at_8 == 8;
  const bool pass = ok && err.empty() && coarse2 < 3.0 * native && capped;
  return {pass, "native " + num(native) + "%, stride-2 " + num(coarse2) +
                    "%, modes at n=8: " + std::to_string(modes_at_8) +
                    (err.empty() ? "" : ", error: " + err)};
}

// ---------------------------------------------------------------------------
// 10. Boundary-band diagnostic.

Outcome criterion10() {
  Grid grid;
  grid.sizes = {64};
  grid.spacing = {1.0 / 64.0};
  std::vector<double> u(64, 1.0), pred = u;
  std::size_t boundary_count = 0;
  for (std::size_t i = 0; i < 64; ++i)
    if (i < 6 || i >= 58) {
      pred[i] = 1.5;
      ++boundary_count;
    }
  const BandErrors e = boundary_interior_errors(u, pred, grid, 1, 1);
  const bool pass = e.boundary > 0.0 && e.interior == 0.0 &&
                    boundary_count == 12 && (64 - boundary_count) == 52 &&
                    e.band == 6;
  return {pass, "boundary " + num(e.boundary) + "%, interior " +
                    num(e.interior) + "%, cardinality " +
                    std::to_string(boundary_count) + "/" +
                    std::to_string(64 - boundary_count)};
}

// ---------------------------------------------------------------------------
// 11. Per-layer scaling benchmark.

Outcome criterion11() {
  const std::size_t d = 32, L = 16;
  std::vector<double> medians;
  for (std::size_t n : {std::size_t(256), std::size_t(512),
                        std::size_t(1024)}) {
    SFOConfig cfg;
    cfg.L = L;
    cfg.d = d;
    cfg.T = 1;
    cfg.grid = {n};
    cfg.out_channels = 1;
    const SFOModel model = init_model(cfg);
    Tensor v = random_tensor({d, n}, 17);
    std::vector<double> times;
    for (int r = 0; r < 5; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      layer_forward(v, model.params.layers[0], model.modes, model.dx_total(),
                    cfg.variant);
      const auto t1 = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    medians.push_back(times[2]);
  }
  const double r1 = medians[1] / medians[0];
  const double r2 = medians[2] / medians[1];
  const bool pass = r1 <= 2.5 && r2 <= 2.5;
  return {pass, "ratios 256->512 " + num(r1) + "x, 512->1024 " + num(r2) +
                    "x"};
}

// ---------------------------------------------------------------------------
// 12. Byte-identical reruns.

Outcome criterion12() {
  auto one_run = [](const std::string& ckpt_path) {
    const Dataset ds = gen_diffusion_reaction_1d(32, 4, 16, 3);
    SFOConfig cfg;
    cfg.L = 4;
    cfg.d = 8;
    cfg.T = 2;
    cfg.grid = {32};
    cfg.in_channels = 2;
    cfg.out_channels = 4;
    cfg.seed = 3;
    SFOModel model = init_model(cfg);
    TrainConfig tcfg;
    tcfg.epochs = 3;
    tcfg.batch = 4;
    tcfg.seed = 3;
    const TrainResult r = train(model, ds, tcfg);
    save_checkpoint(model, ckpt_path);
    std::string csv = "epoch,train_rel_l2,val_rel_l2\n";
    for (std::size_t e = 0; e < r.history.size(); ++e) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", e + 1,
                    r.history[e].train_rel_l2, r.history[e].val_rel_l2);
      csv += buf;
    }
    ExperimentRow row;
    row.factor = "smoke";
    row.value = "run";
    row.seed = 3;
    row.val_rel_l2 = r.history.back().val_rel_l2;
    row.param_count = count_params(cfg);
    row.batch = tcfg.batch;
    csv += experiment_csv({row}, /*include_timing=*/false);
    return csv;
  };
  const std::string a = one_run("/tmp/sfo_accept_a.ckpt");
  const std::string b = one_run("/tmp/sfo_accept_b.ckpt");
  const bool csv_same = a == b;
  const bool ckpt_same = read_file_bytes("/tmp/sfo_accept_a.ckpt") ==
                         read_file_bytes("/tmp/sfo_accept_b.ckpt");
  return {csv_same && ckpt_same,
          std::string("csv ") + (csv_same ? "identical" : "DIFFERS") +
              ", checkpoint " + (ckpt_same ? "identical" : "DIFFERS")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0) continue;
    only.insert(std::atoi(argv[i]));
  }

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion1},  {2, criterion2},  {3, criterion3},
      {4, criterion4},  {5, criterion5},  {6, criterion6},
      {7, criterion7},  {8, criterion8},  {9, criterion9},
      {10, criterion10}, {11, criterion11}, {12, criterion12}};

  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL")
              << " (" << o.detail << ")\n";
    std::cout.flush();
    if (!o.pass) ++failures;
  }
  return failures;
}
