#pragma once

// Latent-space GAN. The generator maps noise u ~ N(0, I_m) to latent codes; the
// discriminator separates them from encoder means μ(x) of genuine minority samples.
// Generated codes are fed to the classifier head as extra minority examples.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "imb/autodiff.hpp"
#include "imb/layers.hpp"
#include "imb/matrix.hpp"
#include "imb/model.hpp"
#include "imb/optim.hpp"

namespace imb::adversary {

enum class GeneratorLoss { minimax, nonsaturating };

std::string_view generator_loss_name(GeneratorLoss g);
GeneratorLoss parse_generator_loss(std::string_view name);

struct AdvConfig {
  bool enabled = false;
  std::size_t d_steps_per_g_step = 1;
  // 0 means half the classifier learning rate.
  double adv_lr = 0.0;
  std::size_t n_aug_per_batch = 16;
  GeneratorLoss generator_loss = GeneratorLoss::nonsaturating;
  std::vector<std::size_t> generator_hidden{32};
  std::vector<std::size_t> discriminator_hidden{32};

  void validate() const;
  double effective_lr(double model_lr) const { return adv_lr > 0.0 ? adv_lr : model_lr / 2.0; }
};

struct LatentGenerator {
  std::vector<ad::DenseLayer> layers;  // ℝ^m → ℝ^m

  std::size_t latent_dim() const { return layers.front().in_dim(); }
  // Single linear layer with W = I, b = 0.
  static LatentGenerator identity(std::size_t latent_dim);
};

struct LatentDiscriminator {
  std::vector<ad::DenseLayer> layers;  // ℝ^m → logit of P(real)
};

LatentGenerator make_generator(std::size_t latent_dim, const std::vector<std::size_t>& hidden, std::mt19937_64& rng);
LatentDiscriminator make_discriminator(std::size_t latent_dim, const std::vector<std::size_t>& hidden,
                                       std::mt19937_64& rng);

struct AdversarialLosses {
  ad::Value d_loss;  // −mean log D(real) − mean log(1 − D(fake))
  ad::Value g_loss;  // minimax: mean log(1 − D(fake)); nonsaturating: −mean log D(fake)
};

// Both batches must be non-empty with `cols` equal to the discriminator input width.
AdversarialLosses adversarial_losses(const std::vector<ad::BoundLayer>& discriminator, ad::Value real_z,
                                     ad::Value fake_z, GeneratorLoss kind);

// G(u) for n seeded noise rows u ~ N(0, I_m).
Matrix synth_minority_latents(const LatentGenerator& generator, std::size_t n, std::uint64_t seed);
Matrix synth_minority_latents(const LatentGenerator& generator, std::size_t n, std::mt19937_64& rng);

// P(real) for each row.
std::vector<double> discriminate(const LatentDiscriminator& d, const Matrix& z);
// Fraction of rows classified correctly at 0.5 (real → D ≥ 0.5, fake → D < 0.5).
double discriminator_accuracy(const LatentDiscriminator& d, const Matrix& real_z, const Matrix& fake_z);

// One Adam step on d_loss with both batches treated as constants. Returns d_loss before the step.
double discriminator_step(LatentDiscriminator& d, ad::AdamState& opt, const Matrix& real_z, const Matrix& fake_z);

struct LatentAdversary {
  LatentGenerator generator;
  LatentDiscriminator discriminator;
  ad::AdamState generator_opt;
  ad::AdamState discriminator_opt;
  std::mt19937_64 rng;
  std::size_t skipped_batches = 0;  // batches without minority rows
  std::size_t steps = 0;
  double last_d_loss = 0.0;
  double last_g_loss = 0.0;
};

LatentAdversary make_adversary(std::size_t latent_dim, const AdvConfig& config, double model_lr, std::uint64_t seed);

std::vector<Matrix*> parameters(LatentGenerator& g);
std::vector<Matrix*> parameters(LatentDiscriminator& d);

// Minibatch handed to a training step.
struct Batch {
  Matrix x;
  std::vector<int> y;
  std::vector<double> weights;
  std::vector<Matrix> eps;  // one draw per Monte-Carlo sample
};

// Plain classifier/encoder update on the weighted ELBO, plus `aux_latents` (may be empty)
// scored by the head as label-1 examples with weight `aux_weight`, their BCE terms added to
// the batch sum before the 1/B mean. Returns the loss value before the update.
double classifier_step(dpgm::VariationalClassifier& model, ad::AdamState& opt, const Batch& batch,
                       const Matrix& aux_latents, double aux_weight);

// (a) d_steps_per_g_step discriminator updates on encoder means of the batch's minority rows
//     vs generator samples, (b) one generator update, (c) classifier_step with
//     n_aug_per_batch generated codes weighted by `minority_weight`. Without minority rows in
//     the batch, (a)–(b) are skipped and counted. Returns the classifier loss.
double augmented_training_step(dpgm::VariationalClassifier& model, ad::AdamState& model_opt, const Batch& batch,
                               double minority_weight, int minority_label, LatentAdversary& adv,
                               const AdvConfig& config);

std::string adversary_to_json(const LatentAdversary& adv, const AdvConfig& config);
std::string adv_config_to_json(const AdvConfig& c);
AdvConfig adv_config_from_json(const std::string& text);

}  // namespace imb::adversary
