#include "imb/adversary.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "imb/errors.hpp"
#include "imb/serialize.hpp"

namespace imb::adversary {

using ad::Activation;
using ad::Tape;
using ad::Value;
using nlohmann::json;

std::string_view generator_loss_name(GeneratorLoss g) {
  return g == GeneratorLoss::minimax ? "minimax" : "nonsaturating";
}

GeneratorLoss parse_generator_loss(std::string_view name) {
  if (name == "minimax") return GeneratorLoss::minimax;
  if (name == "nonsaturating") return GeneratorLoss::nonsaturating;
  throw ContractError("unknown generator_loss '" + std::string(name) + "' (expected minimax or nonsaturating)");
}

void AdvConfig::validate() const {
  if (d_steps_per_g_step == 0) throw ContractError("d_steps_per_g_step must be at least 1");
  if (adv_lr < 0.0) throw ContractError("adv_lr must be non-negative");
}

LatentGenerator LatentGenerator::identity(std::size_t latent_dim) {
  LatentGenerator g;
  g.layers.push_back(ad::make_zero_dense(latent_dim, latent_dim, Activation::identity));
  g.layers.front().weights = Matrix::identity(latent_dim);
  return g;
}

LatentGenerator make_generator(std::size_t latent_dim, const std::vector<std::size_t>& hidden, std::mt19937_64& rng) {
  return {ad::make_mlp(latent_dim, hidden, latent_dim, Activation::relu, Activation::identity, rng)};
}

LatentDiscriminator make_discriminator(std::size_t latent_dim, const std::vector<std::size_t>& hidden,
                                       std::mt19937_64& rng) {
  return {ad::make_mlp(latent_dim, hidden, 1, Activation::relu, Activation::identity, rng)};
}

AdversarialLosses adversarial_losses(const std::vector<ad::BoundLayer>& discriminator, Value real_z, Value fake_z,
                                     GeneratorLoss kind) {
  if (real_z.rows() == 0 || fake_z.rows() == 0) throw ContractError("adversarial_losses: empty batch");
  if (real_z.cols() != fake_z.cols()) throw DimensionError("adversarial_losses: real/fake latent widths differ");
  const Value real_logits = ad::forward(discriminator, real_z);
  const Value fake_logits = ad::forward(discriminator, fake_z);
  // −log D(z) = softplus(−a), −log(1 − D(z)) = softplus(a)
  const Value fake_term = ad::mean(ad::softplus(fake_logits));
  const Value d_loss = ad::mean(ad::softplus(-real_logits)) + fake_term;
  const Value g_loss =
      kind == GeneratorLoss::minimax ? -fake_term : ad::mean(ad::softplus(-fake_logits));
  return {d_loss, g_loss};
}

Matrix synth_minority_latents(const LatentGenerator& generator, std::size_t n, std::mt19937_64& rng) {
  if (n == 0) throw ContractError("synth_minority_latents: n must be at least 1");
  const std::size_t m = generator.latent_dim();
  Matrix u(n, m);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : u.data) v = normal(rng);
  Tape tape;
  return ad::forward(ad::bind(tape, generator.layers), tape.leaf(std::move(u))).data();
}

Matrix synth_minority_latents(const LatentGenerator& generator, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return synth_minority_latents(generator, n, rng);
}

std::vector<double> discriminate(const LatentDiscriminator& d, const Matrix& z) {
  Tape tape;
  const Matrix& logits = ad::forward(ad::bind(tape, d.layers), tape.leaf(z)).data();
  std::vector<double> p(logits.rows);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = ad::stable_sigmoid(logits.data[i]);
  return p;
}

double discriminator_accuracy(const LatentDiscriminator& d, const Matrix& real_z, const Matrix& fake_z) {
  std::size_t correct = 0;
  for (double p : discriminate(d, real_z))
    if (p >= 0.5) ++correct;
  for (double p : discriminate(d, fake_z))
    if (p < 0.5) ++correct;
  return static_cast<double>(correct) / static_cast<double>(real_z.rows + fake_z.rows);
}

std::vector<Matrix*> parameters(LatentGenerator& g) {
  std::vector<Matrix*> out;
  ad::collect_parameters(g.layers, out);
  return out;
}

std::vector<Matrix*> parameters(LatentDiscriminator& d) {
  std::vector<Matrix*> out;
  ad::collect_parameters(d.layers, out);
  return out;
}

double discriminator_step(LatentDiscriminator& d, ad::AdamState& opt, const Matrix& real_z, const Matrix& fake_z) {
  Tape tape;
  const auto bound = ad::bind(tape, d.layers);
  const AdversarialLosses losses =
      adversarial_losses(bound, tape.leaf(real_z), tape.leaf(fake_z), GeneratorLoss::nonsaturating);
  const double value = losses.d_loss.item();
  tape.backward(losses.d_loss);
  std::vector<Matrix> grads;
  ad::collect_gradients(bound, grads);
  const auto params = parameters(d);
  ad::adam_step(opt, params, grads);
  return value;
}

LatentAdversary make_adversary(std::size_t latent_dim, const AdvConfig& config, double model_lr, std::uint64_t seed) {
  config.validate();
  LatentAdversary adv;
  adv.rng.seed(seed ^ 0x5eedad5eedULL);
  adv.generator = make_generator(latent_dim, config.generator_hidden, adv.rng);
  adv.discriminator = make_discriminator(latent_dim, config.discriminator_hidden, adv.rng);
  const double lr = config.effective_lr(model_lr);
  adv.generator_opt = ad::make_adam(parameters(adv.generator), lr);
  adv.discriminator_opt = ad::make_adam(parameters(adv.discriminator), lr);
  return adv;
}

double classifier_step(dpgm::VariationalClassifier& model, ad::AdamState& opt, const Batch& batch,
                       const Matrix& aux_latents, double aux_weight) {
  Tape tape;
  const dpgm::BoundModel bound = dpgm::bind(tape, model);
  const dpgm::LossTerms terms =
      dpgm::weighted_elbo_terms(bound, tape, batch.x, batch.y, batch.weights, batch.eps, model.config.beta_rec);
  Value loss = terms.loss;
  if (aux_latents.rows > 0) {
    Matrix weights(batch.x.rows, 1);
    for (std::size_t i = 0; i < weights.rows; ++i) weights.data[i] = batch.weights[i];
    const Value weighted_sum = ad::sum(tape.leaf(std::move(weights)) * terms.per_sample);
    const Value aux_logits = dpgm::head_logits(bound, tape.leaf(aux_latents));
    const Value aux_bce = dpgm::bce_with_logits(aux_logits, tape.leaf(Matrix(aux_latents.rows, 1, 1.0)));
    loss = ad::scale(weighted_sum + ad::scale(ad::sum(aux_bce), aux_weight), 1.0 / static_cast<double>(batch.x.rows));
  }
  const double value = loss.item();
  if (!std::isfinite(value)) throw NumericError("classifier_step: non-finite loss");
  tape.backward(loss);
  const auto params = model.parameters();
  ad::adam_step(opt, params, bound.gradients());
  return value;
}

double augmented_training_step(dpgm::VariationalClassifier& model, ad::AdamState& model_opt, const Batch& batch,
                               double minority_weight, int minority_label, LatentAdversary& adv,
                               const AdvConfig& config) {
  std::vector<std::size_t> minority_rows;
  for (std::size_t i = 0; i < batch.y.size(); ++i)
    if (batch.y[i] == minority_label) minority_rows.push_back(i);

  if (minority_rows.empty()) {
    adv.skipped_batches += 1;
  } else {
    Matrix x_min(minority_rows.size(), batch.x.cols);
    for (std::size_t r = 0; r < minority_rows.size(); ++r)
      std::copy_n(batch.x.row(minority_rows[r]).begin(), batch.x.cols, x_min.row(r).begin());
    // Encoder means enter as constants: no gradient flows from the adversary into q(z|x).
    const Matrix real_z = dpgm::encode(model, x_min).mu;
    const std::size_t n_fake = real_z.rows;

    for (std::size_t s = 0; s < config.d_steps_per_g_step; ++s) {
      const Matrix fake_z = synth_minority_latents(adv.generator, n_fake, adv.rng);
      adv.last_d_loss = discriminator_step(adv.discriminator, adv.discriminator_opt, real_z, fake_z);
    }

    Tape tape;
    const auto gen = ad::bind(tape, adv.generator.layers);
    const auto disc = ad::bind(tape, adv.discriminator.layers);
    Matrix u(n_fake, adv.generator.latent_dim());
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : u.data) v = normal(adv.rng);
    const Value fake = ad::forward(gen, tape.leaf(std::move(u)));
    const AdversarialLosses losses = adversarial_losses(disc, tape.leaf(real_z), fake, config.generator_loss);
    adv.last_g_loss = losses.g_loss.item();
    tape.backward(losses.g_loss);
    std::vector<Matrix> grads;
    ad::collect_gradients(gen, grads);
    const auto params = parameters(adv.generator);
    ad::adam_step(adv.generator_opt, params, grads);
    adv.steps += 1;
  }

  Matrix aux;
  if (config.n_aug_per_batch > 0) aux = synth_minority_latents(adv.generator, config.n_aug_per_batch, adv.rng);
  return classifier_step(model, model_opt, batch, aux, minority_weight);
}

std::string adv_config_to_json(const AdvConfig& c) {
  json j{{"enabled", c.enabled},
         {"d_steps_per_g_step", c.d_steps_per_g_step},
         {"adv_lr", c.adv_lr},
         {"n_aug_per_batch", c.n_aug_per_batch},
         {"generator_loss", std::string(generator_loss_name(c.generator_loss))},
         {"generator_hidden", c.generator_hidden},
         {"discriminator_hidden", c.discriminator_hidden}};
  return j.dump();
}

AdvConfig adv_config_from_json(const std::string& text) {
  AdvConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ContractError(std::string("adversary config: ") + e.what());
  }
  serialize::reject_unknown_keys(j,
                                 {"enabled", "d_steps_per_g_step", "adv_lr", "n_aug_per_batch", "generator_loss",
                                  "generator_hidden", "discriminator_hidden"},
                                 "adversary config");
  try {
    if (j.contains("enabled")) c.enabled = j["enabled"].get<bool>();
    if (j.contains("d_steps_per_g_step")) c.d_steps_per_g_step = j["d_steps_per_g_step"].get<std::size_t>();
    if (j.contains("adv_lr")) c.adv_lr = j["adv_lr"].get<double>();
    if (j.contains("n_aug_per_batch")) c.n_aug_per_batch = j["n_aug_per_batch"].get<std::size_t>();
    if (j.contains("generator_loss")) c.generator_loss = parse_generator_loss(j["generator_loss"].get<std::string>());
    if (j.contains("generator_hidden")) c.generator_hidden = j["generator_hidden"].get<std::vector<std::size_t>>();
    if (j.contains("discriminator_hidden"))
      c.discriminator_hidden = j["discriminator_hidden"].get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw ContractError(std::string("adversary config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string adversary_to_json(const LatentAdversary& adv, const AdvConfig& config) {
  json j{{"config", json::parse(adv_config_to_json(config))},
         {"generator", serialize::layers_to_json(adv.generator.layers)},
         {"discriminator", serialize::layers_to_json(adv.discriminator.layers)},
         {"steps", adv.steps},
         {"skipped_batches", adv.skipped_batches}};
  return j.dump();
}

}  // namespace imb::adversary
