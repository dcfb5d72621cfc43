#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfo/basis.hpp"
#include "sfo/tensor.hpp"

namespace sfo {

enum class Variant { MLP, GLU };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct SFOConfig {
  std::size_t L = 16;
  std::size_t d = 32;
  std::size_t T = 4;
  Variant variant = Variant::MLP;
  IndexScheme scheme = IndexScheme::Tied;
  BasisKind basis_kind = BasisKind::USB;
  std::vector<std::size_t> grid;  // spatial sizes, all equal powers of two
  std::size_t in_channels = 2;    // input fields + coordinate channels
  std::size_t out_channels = 16;  // output fields x time steps
  std::uint64_t seed = 0;

  std::size_t arity() const { return grid.size(); }
  std::size_t grid_total() const;
  std::string to_json() const;
  static SFOConfig from_json(const std::string& json);
};

struct LayerParams {
  std::vector<Tensor> thetas;  // K matrices d x d
  Tensor w1, w2;               // MLP mixers (GLU: gate / value mixers)
  Tensor gain, bias;           // normalization parameters, d each
};

struct ModelParams {
  Tensor p_w, p_b;  // lifting
  std::vector<LayerParams> layers;
  Tensor q_w, q_b;  // projection

  std::vector<Tensor*> ordered();
  std::vector<const Tensor*> ordered() const;
};

struct SFOModel {
  SFOConfig cfg;
  ModelParams params;
  SpectralBasis basis;
  ModeSet modes;

  double dx_total() const;  // Delta-x^M quadrature weight
};

SFOModel init_model(const SFOConfig& cfg);

// Mode-mixing spectral operator: K v = sum_l Theta_l ifft(phi_l_hat .* v_hat)
// * dx^M, evaluated with a single forward and a single inverse transform.
Tensor stu_apply(const Tensor& v, const std::vector<Tensor>& thetas,
                 const ModeSet& modes, double dx_total);

Tensor layer_forward(const Tensor& v, const LayerParams& layer,
                     const ModeSet& modes, double dx_total, Variant variant);

Tensor model_forward(const SFOConfig& cfg, const ModeSet& modes,
                     const ModelParams& params, const Tensor& a);

Tensor model_forward(const SFOModel& model, const Tensor& a);

// Per-tape parameter copies for a training step.
ModelParams taped_copy(const ModelParams& params, Tape& tape);

std::size_t count_params(const SFOConfig& cfg);

// Dense (n*d) x (n*d) operator matrix for a 1D layer; flattened fields are
// grid-major blocks of d. Test-only, guarded to n <= 128.
Matrix materialize_kernel(const std::vector<Tensor>& thetas,
                          const SpectralBasis& basis);

// Rebuild the spectral basis at resolution n2, capping L at n2 and dropping
// the mixing matrices of removed modes.
SFOModel rebuild_for_resolution(const SFOModel& model, std::size_t n2);

// Per-mode ||Theta_l||_F averaged over layers.
std::vector<double> coefficient_norms(const SFOModel& model);

void save_checkpoint(const SFOModel& model, const std::string& path);
SFOModel load_checkpoint(const std::string& path);

namespace ref {
// Mode-wise direct spatial sum (the discrete-kernel form); serial oracle for
// stu_apply.
Tensor stu_apply_direct(const Tensor& v, const std::vector<Tensor>& thetas,
                        const ModeSet& modes, double dx_total);
}  // namespace ref

}  // namespace sfo
