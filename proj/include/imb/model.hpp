#pragma once

// Class-weighted variational latent-variable classifier.
//
// Generative story: p(x, y, z) = p(y|z) p(z|x) p(x), approximated by an amortised Gaussian
// q(z|x) = N(μ(x), diag σ²(x)) against the prior p(z) = N(0, I). Training minimises the
// negated, class-weighted evidence lower bound
//
//   loss = (1/B) Σ_i w(y_i) [ (1/S) Σ_s BCE(head(z_is), y_i) + KL(q(z|x_i) ‖ p(z))
//                             + beta_rec · ‖x_i − x̂_i‖² / d ]
//
// with z_is = μ(x_i) + σ(x_i) ⊙ ε_is (reparameterisation), S = mc_samples_train and the
// reconstruction term present only when beta_rec > 0 (it builds the decoder). Prediction
// uses the deterministic code z = μ(x).

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "imb/autodiff.hpp"
#include "imb/layers.hpp"
#include "imb/matrix.hpp"
#include "imb/resampling.hpp"

namespace imb::dpgm {

inline constexpr double kLogvarMin = -10.0;
inline constexpr double kLogvarMax = 10.0;

enum class WeightMode { none, ratio, custom };

std::string_view weight_mode_name(WeightMode m);
WeightMode parse_weight_mode(std::string_view name);

struct ModelConfig {
  std::size_t latent_dim = 8;
  std::vector<std::size_t> encoder_hidden{64, 32};
  std::vector<std::size_t> head_hidden{16};
  std::size_t mc_samples_train = 1;
  double beta_rec = 0.0;
  WeightMode weight_mode = WeightMode::ratio;
  double custom_minority_weight = 1.0;
  double lr = 1e-3;
  std::size_t epochs = 20;
  std::size_t batch_size = 128;
  std::uint64_t seed = 42;
  // Iterations between loss-trace records; 0 records once per epoch.
  std::size_t trace_every = 0;

  // Throws ContractError on an invalid combination.
  void validate() const;
};

struct VariationalClassifier {
  std::size_t input_dim = 0;
  ModelConfig config;
  std::vector<ad::DenseLayer> encoder;  // shared trunk, relu
  ad::DenseLayer mu_layer;              // trunk → μ
  ad::DenseLayer logvar_layer;          // trunk → log σ² (clamped)
  std::vector<ad::DenseLayer> head;     // z → logit of p(y=1|z)
  std::vector<ad::DenseLayer> decoder;  // z → x̂; empty unless beta_rec > 0

  std::size_t latent_dim() const { return config.latent_dim; }
  bool has_decoder() const { return !decoder.empty(); }

  // Stable order: encoder, mu, logvar, head, decoder; weights before bias in each layer.
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
};

// Seeded initialisation from config.seed.
VariationalClassifier make_model(std::size_t input_dim, const ModelConfig& config);
// Every weight and bias zero: μ = 0, logvar = 0, p(y=1|z) = 0.5.
VariationalClassifier make_zero_model(std::size_t input_dim, const ModelConfig& config);

// Model parameters bound as leaves on a tape.
struct BoundModel {
  std::vector<ad::BoundLayer> encoder;
  ad::BoundLayer mu_layer;
  ad::BoundLayer logvar_layer;
  std::vector<ad::BoundLayer> head;
  std::vector<ad::BoundLayer> decoder;

  std::vector<Matrix> gradients() const;
};

BoundModel bind(ad::Tape& tape, const VariationalClassifier& model);

struct LatentPosterior {
  ad::Value mu;
  ad::Value logvar;
};

LatentPosterior encode(const BoundModel& model, ad::Value x);
// z = μ + exp(logvar/2) ⊙ ε
ad::Value sample_latent(ad::Value mu, ad::Value logvar, ad::Value eps);
// Per-row ½ Σ_j (μ² + σ² − 1 − logvar), shape n×1.
ad::Value kl_diag_gaussian(ad::Value mu, ad::Value logvar);
ad::Value head_logits(const BoundModel& model, ad::Value z);
// Stable BCE from logits: max(a,0) − a·y + log(1 + e^{−|a|}), elementwise.
ad::Value bce_with_logits(ad::Value logits, ad::Value targets);

double kl_diag_gaussian(std::span<const double> mu, std::span<const double> logvar);

// Numeric encoder output for a batch (rows of x).
struct EncodedBatch {
  Matrix mu;
  Matrix logvar;
};
EncodedBatch encode(const VariationalClassifier& model, const Matrix& x);
Matrix sample_latent(const Matrix& mu, const Matrix& logvar, const Matrix& eps);

// Standard-normal draws shaped for one batch: `samples` matrices of rows × latent_dim.
std::vector<Matrix> draw_eps(std::size_t samples, std::size_t rows, std::size_t latent_dim,
                             std::mt19937_64& rng);

struct LossTerms {
  ad::Value per_sample;  // n×1 unweighted negative-ELBO terms
  ad::Value loss;        // (1/n) Σ w_i · term_i
};

// `eps` holds one n×latent_dim matrix per Monte-Carlo sample.
LossTerms weighted_elbo_terms(const BoundModel& model, ad::Tape& tape, const Matrix& x,
                              std::span<const int> y, std::span<const double> sample_weights,
                              std::span<const Matrix> eps, double beta_rec);

ad::Value weighted_elbo_loss(const BoundModel& model, ad::Tape& tape, const Matrix& x,
                             std::span<const int> y, std::span<const double> sample_weights,
                             std::span<const Matrix> eps, double beta_rec);

// Weights for weight_mode none → all 1, ratio → class_weights(train_labels),
// custom → custom_minority_weight for the minority label.
resample::ClassWeights resolve_weights(const ModelConfig& config, std::span<const int> train_labels);

// sigmoid(head(μ(x))) per row.
std::vector<double> predict_proba(const VariationalClassifier& model, const Matrix& x);

// Checkpoint JSON. `extra` members (e.g. "adversary", "norm_stats") are merged at top level.
std::string to_json(const VariationalClassifier& model, const std::string& extra_json = "{}");
VariationalClassifier model_from_json(const std::string& text);

std::string config_to_json(const ModelConfig& c);
ModelConfig config_from_json(const std::string& text);

}  // namespace imb::dpgm
