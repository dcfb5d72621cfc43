#include "sfo/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "sfo/util.hpp"

namespace sfo {

std::string TrainConfig::to_json() const {
  nlohmann::json j;
  j["lr"] = lr;
  j["epochs"] = epochs;
  j["batch"] = batch;
  j["seed"] = seed;
  j["split"] = split;
  j["weight_decay"] = weight_decay;
  return j.dump();
}

TrainConfig TrainConfig::from_json(const std::string& json) {
  const auto j = nlohmann::json::parse(json);
  TrainConfig c;
  c.lr = j.value("lr", c.lr);
  c.epochs = j.value("epochs", c.epochs);
  c.batch = j.value("batch", c.batch);
  c.seed = j.value("seed", c.seed);
  c.split = j.value("split", c.split);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  if (!(c.lr >= 0.0) || c.epochs < 1 || c.batch < 1 || !(c.split > 0.0) ||
      !(c.split < 1.0))
    throw std::invalid_argument("train config out of range");
  return c;
}

AdamState AdamState::init(const std::vector<Tensor*>& params) {
  AdamState s;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const Tensor* p : params) {
    s.m.emplace_back(p->size(), 0.0);
    s.v.emplace_back(p->size(), 0.0);
  }
  return s;
}

void adam_step(const std::vector<Tensor*>& params,
               const std::vector<std::vector<double>>& grads, AdamState& state,
               double lr) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: parameter/gradient mismatch");
  ++state.step;
  const double b1 = AdamState::beta1, b2 = AdamState::beta2;
  const double c1 = 1.0 - std::pow(b1, double(state.step));
  const double c2 = 1.0 - std::pow(b2, double(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const std::vector<double>& g = grads[k];
    if (g.size() != p.size())
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i]))
        throw std::runtime_error("adam_step: non-finite gradient in tensor " +
                                 std::to_string(k) + " entry " +
                                 std::to_string(i));
      double& m = state.m[k][i];
      double& v = state.v[k][i];
      m = b1 * m + (1.0 - b1) * g[i];
      v = b2 * v + (1.0 - b2) * g[i] * g[i];
      const double mhat = m / c1;
      const double vhat = v / c2;
      p.v[i] -= lr * mhat / (std::sqrt(vhat) + AdamState::eps);
    }
  }
}

void split_indices(std::size_t N, double split, std::uint64_t seed,
                   std::vector<std::size_t>& train_out,
                   std::vector<std::size_t>& val_out) {
  std::vector<std::size_t> idx(N);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, 77));
  for (std::size_t i = N; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  const std::size_t n_train = static_cast<std::size_t>(
      std::floor(split * static_cast<double>(N)));
  if (n_train == 0 || n_train == N)
    throw std::invalid_argument("split_indices: degenerate split");
  train_out.assign(idx.begin(), idx.begin() + long(n_train));
  val_out.assign(idx.begin() + long(n_train), idx.end());
}

namespace {

Tensor sample_tensor(const Dataset& ds, std::size_t j, bool input) {
  std::vector<std::size_t> shape{input ? ds.c_a : ds.c_u};
  for (std::size_t s : ds.grid.sizes) shape.push_back(s);
  const std::size_t len = shape_size(shape);
  const double* src = input ? ds.input(j) : ds.target(j);
  return Tensor::from(std::move(shape), std::vector<double>(src, src + len));
}

void check_compat(const SFOModel& model, const Dataset& ds) {
  if (model.cfg.grid != ds.grid.sizes ||
      model.cfg.in_channels != ds.c_a || model.cfg.out_channels != ds.c_u)
    throw std::invalid_argument(
        "dataset geometry does not match the model config");
}

}  // namespace

TrainResult train(SFOModel& model, const Dataset& ds, const TrainConfig& cfg) {
  check_compat(model, ds);
  TrainResult result;
  split_indices(ds.N, cfg.split, cfg.seed, result.train_indices,
                result.val_indices);

  std::vector<Tensor*> params = model.params.ordered();
  AdamState state = AdamState::init(params);
  std::vector<std::vector<double>> batch_grads;
  for (const Tensor* p : params) batch_grads.emplace_back(p->size(), 0.0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order = result.train_indices;
    Rng rng(derive_seed(cfg.seed, 1000 + epoch));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1],
                order[static_cast<std::size_t>(rng.next_u64() % i)]);

    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch);
      for (auto& g : batch_grads) std::fill(g.begin(), g.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        Tape tape;
        ModelParams tp = taped_copy(model.params, tape);
        const Tensor a = sample_tensor(ds, order[i], true);
        const Tensor target = sample_tensor(ds, order[i], false);
        const Tensor pred = model_forward(model.cfg, model.modes, tp, a);
        const Tensor loss = rel_l2_loss(pred, target);
        batch_loss += loss.v[0];
        tape.backward(loss);
        const std::vector<const Tensor*> tps =
            static_cast<const ModelParams&>(tp).ordered();
        for (std::size_t k = 0; k < tps.size(); ++k) {
          const std::vector<double>& g = tape.grad(*tps[k]);
          for (std::size_t e = 0; e < g.size(); ++e) batch_grads[k][e] += g[e];
        }
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (auto& g : batch_grads)
        for (double& x : g) x *= inv;
      batch_loss *= inv;
      epoch_loss += batch_loss * static_cast<double>(stop - start);
      seen += stop - start;
      if (!(batch_loss <= 1e3)) {
        result.diverged = true;
        EpochStats s;
        s.train_rel_l2 = 100.0 * epoch_loss / static_cast<double>(seen);
        s.val_rel_l2 = evaluate_subset(model, ds, result.val_indices).rel_l2;
        result.history.push_back(s);
        return result;
      }
      adam_step(params, batch_grads, state, cfg.lr);
    }

    EpochStats s;
    s.train_rel_l2 = 100.0 * epoch_loss / static_cast<double>(seen);
    s.val_rel_l2 = evaluate_subset(model, ds, result.val_indices).rel_l2;
    result.history.push_back(s);
  }
  return result;
}

EvalMetrics evaluate_subset(const SFOModel& model, const Dataset& ds,
                            const std::vector<std::size_t>& indices) {
  check_compat(model, ds);
  if (indices.empty())
    throw std::invalid_argument("evaluate_subset: no samples");
  const std::size_t total = ds.grid.total();
  const std::size_t len = ds.c_u * total;
  std::vector<double> truths(indices.size() * len);
  std::vector<double> preds(indices.size() * len);
  // Per-sample forward passes write disjoint slices; the metric reduction
  // below stays in fixed order, so parallelism cannot change the result.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long ii = 0; ii < static_cast<long long>(indices.size()); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const Tensor a = sample_tensor(ds, indices[i], true);
    const Tensor p = model_forward(model, a);
    std::copy(p.v.begin(), p.v.end(), preds.begin() + long(i * len));
    const double* t = ds.target(indices[i]);
    std::copy(t, t + len, truths.begin() + long(i * len));
  }
  EvalMetrics m;
  m.rel_l2 = rel_l2(truths, preds, indices.size());
  m.bands = boundary_interior_errors(truths, preds, ds.grid, indices.size(),
                                     ds.c_u);
  m.coeff_norms = coefficient_norms(model);
  return m;
}

EvalMetrics evaluate(const SFOModel& model, const Dataset& ds) {
  std::vector<std::size_t> all(ds.N);
  std::iota(all.begin(), all.end(), 0);
  return evaluate_subset(model, ds, all);
}

std::string EvalMetrics::to_json() const {
  nlohmann::json j;
  j["rel_l2"] = rel_l2;
  j["boundary_rel_l2"] = bands.boundary;
  j["interior_rel_l2"] = bands.interior;
  j["band_width"] = bands.band;
  j["coefficient_norms"] = coeff_norms;
  return j.dump(2);
}

namespace {

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

ExperimentRow run_arm(SFOConfig cfg, TrainConfig tcfg, const Dataset& ds,
                      const std::string& factor, const std::string& value,
                      std::uint64_t seed) {
  cfg.seed = seed;
  tcfg.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  SFOModel model = init_model(cfg);
  const TrainResult r = train(model, ds, tcfg);
  const auto t1 = std::chrono::steady_clock::now();
  ExperimentRow row;
  row.factor = factor;
  row.value = value;
  row.seed = seed;
  row.val_rel_l2 = r.history.back().val_rel_l2;
  row.param_count = count_params(cfg);
  row.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  row.batch = tcfg.batch;
  row.weight_decay = tcfg.weight_decay;
  return row;
}

}  // namespace

std::string experiment_csv(const std::vector<ExperimentRow>& rows,
                           bool include_timing) {
  std::string out = "factor,value,seed,val_rel_l2,param_count,batch,weight_decay";
  if (include_timing) out += ",wall_seconds";
  out += "\n";
  for (const auto& r : rows) {
    out += r.factor + "," + r.value + "," + std::to_string(r.seed) + "," +
           fmt_double(r.val_rel_l2) + "," + std::to_string(r.param_count) +
           "," + std::to_string(r.batch) + "," + fmt_double(r.weight_decay);
    if (include_timing) out += "," + fmt_double(r.wall_seconds);
    out += "\n";
  }
  return out;
}

std::vector<ExperimentRow> ablate_basis(const SFOConfig& base,
                                        const TrainConfig& tcfg,
                                        const Dataset& ds,
                                        const std::vector<BasisKind>& kinds,
                                        const std::vector<std::uint64_t>& seeds) {
  std::vector<ExperimentRow> rows;
  for (BasisKind kind : kinds)
    for (std::uint64_t seed : seeds) {
      SFOConfig cfg = base;
      cfg.basis_kind = kind;
      rows.push_back(run_arm(cfg, tcfg, ds, "basis", to_string(kind), seed));
    }
  return rows;
}

std::vector<ExperimentRow> sweep_rank(const SFOConfig& base,
                                      const TrainConfig& tcfg,
                                      const Dataset& ds,
                                      const std::vector<std::size_t>& Ls,
                                      const std::vector<std::uint64_t>& seeds) {
  std::vector<ExperimentRow> rows;
  for (std::size_t L : Ls)
    for (std::uint64_t seed : seeds) {
      SFOConfig cfg = base;
      cfg.L = L;
      rows.push_back(run_arm(cfg, tcfg, ds, "L", std::to_string(L), seed));
    }
  return rows;
}

std::vector<ExperimentRow> sweep_width(const SFOConfig& base,
                                       const TrainConfig& tcfg,
                                       const Dataset& ds,
                                       const std::vector<std::size_t>& widths,
                                       const std::vector<std::uint64_t>& seeds) {
  std::vector<ExperimentRow> rows;
  for (std::size_t d : widths)
    for (std::uint64_t seed : seeds) {
      SFOConfig cfg = base;
      cfg.d = d;
      rows.push_back(run_arm(cfg, tcfg, ds, "d", std::to_string(d), seed));
    }
  return rows;
}

std::vector<ExperimentRow> tied_vs_multi(const SFOConfig& base,
                                         const TrainConfig& tcfg,
                                         const Dataset& ds,
                                         const std::vector<std::uint64_t>& seeds) {
  std::vector<ExperimentRow> rows;
  for (IndexScheme scheme : {IndexScheme::Tied, IndexScheme::Multi})
    for (std::uint64_t seed : seeds) {
      SFOConfig cfg = base;
      cfg.L = 6;
      cfg.scheme = scheme;
      rows.push_back(run_arm(cfg, tcfg, ds, "scheme", to_string(scheme), seed));
    }
  return rows;
}

std::vector<ExperimentRow> glu_vs_mlp(const SFOConfig& base,
                                      const TrainConfig& tcfg,
                                      const Dataset& ds,
                                      const std::vector<std::uint64_t>& seeds) {
  std::vector<ExperimentRow> rows;
  for (Variant variant : {Variant::MLP, Variant::GLU})
    for (std::uint64_t seed : seeds) {
      SFOConfig cfg = base;
      cfg.variant = variant;
      rows.push_back(
          run_arm(cfg, tcfg, ds, "variant", to_string(variant), seed));
    }
  return rows;
}

std::vector<ExperimentRow> resolution_transfer(
    const SFOModel& model, const Dataset& ds, const TrainConfig& tcfg,
    const std::vector<std::size_t>& strides) {
  std::vector<std::size_t> train_idx, val_idx;
  split_indices(ds.N, tcfg.split, tcfg.seed, train_idx, val_idx);
  std::vector<ExperimentRow> rows;
  for (std::size_t s : strides) {
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset sub = subsample(ds, s);
    const SFOModel coarse =
        (s == 1) ? model : rebuild_for_resolution(model, sub.grid.sizes[0]);
    const EvalMetrics m = evaluate_subset(coarse, sub, val_idx);
    const auto t1 = std::chrono::steady_clock::now();
    ExperimentRow row;
    row.factor = "stride";
    row.value = std::to_string(s);
    row.seed = tcfg.seed;
    row.val_rel_l2 = m.rel_l2;
    row.param_count = count_params(coarse.cfg);
    row.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    row.batch = tcfg.batch;
    row.weight_decay = tcfg.weight_decay;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sfo
