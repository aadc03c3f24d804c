#include "imb/model.hpp"

#include <cmath>

#include "imb/errors.hpp"
#include "imb/serialize.hpp"

namespace imb::dpgm {

using ad::Activation;
using ad::Tape;
using ad::Value;
using nlohmann::json;

std::string_view weight_mode_name(WeightMode m) {
  switch (m) {
    case WeightMode::none: return "none";
    case WeightMode::ratio: return "ratio";
    case WeightMode::custom: return "custom";
  }
  return "ratio";
}

WeightMode parse_weight_mode(std::string_view name) {
  if (name == "none") return WeightMode::none;
  if (name == "ratio") return WeightMode::ratio;
  if (name == "custom") return WeightMode::custom;
  throw ContractError("unknown weight_mode '" + std::string(name) + "' (expected none, ratio or custom)");
}

void ModelConfig::validate() const {
  if (latent_dim == 0) throw ContractError("latent_dim must be positive");
  if (mc_samples_train == 0) throw ContractError("mc_samples_train must be at least 1");
  if (!(beta_rec >= 0.0)) throw ContractError("beta_rec must be non-negative");
  if (!(lr > 0.0)) throw ContractError("lr must be positive");
  if (batch_size == 0) throw ContractError("batch_size must be positive");
  if (weight_mode == WeightMode::custom && !(custom_minority_weight > 0.0))
    throw ContractError("custom_minority_weight must be positive");
  for (std::size_t h : encoder_hidden)
    if (h == 0) throw ContractError("encoder_hidden sizes must be positive");
  for (std::size_t h : head_hidden)
    if (h == 0) throw ContractError("head_hidden sizes must be positive");
}

std::vector<Matrix*> VariationalClassifier::parameters() {
  std::vector<Matrix*> out;
  ad::collect_parameters(encoder, out);
  ad::collect_parameters(mu_layer, out);
  ad::collect_parameters(logvar_layer, out);
  ad::collect_parameters(head, out);
  ad::collect_parameters(decoder, out);
  return out;
}

std::vector<const Matrix*> VariationalClassifier::parameters() const {
  auto mutable_params = const_cast<VariationalClassifier*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

VariationalClassifier make_model(std::size_t input_dim, const ModelConfig& config) {
  config.validate();
  if (input_dim == 0) throw ContractError("make_model: input dimension must be positive");
  std::mt19937_64 rng(config.seed);
  VariationalClassifier m;
  m.input_dim = input_dim;
  m.config = config;
  std::size_t width = input_dim;
  for (std::size_t h : config.encoder_hidden) {
    m.encoder.push_back(ad::make_dense(width, h, Activation::relu, rng));
    width = h;
  }
  m.mu_layer = ad::make_dense(width, config.latent_dim, Activation::identity, rng);
  m.logvar_layer = ad::make_dense(width, config.latent_dim, Activation::identity, rng);
  // Start near σ = 1; a full-scale draw puts σ² in the tens and swamps the first steps with KL.
  for (double& v : m.logvar_layer.weights.data) v *= 0.01;
  m.head = ad::make_mlp(config.latent_dim, config.head_hidden, 1, Activation::relu, Activation::identity, rng);
  if (config.beta_rec > 0.0) {
    std::vector<std::size_t> mirrored(config.encoder_hidden.rbegin(), config.encoder_hidden.rend());
    m.decoder = ad::make_mlp(config.latent_dim, mirrored, input_dim, Activation::relu, Activation::identity, rng);
  }
  return m;
}

VariationalClassifier make_zero_model(std::size_t input_dim, const ModelConfig& config) {
  VariationalClassifier m = make_model(input_dim, config);
  for (Matrix* p : m.parameters())
    for (double& v : p->data) v = 0.0;
  return m;
}

std::vector<Matrix> BoundModel::gradients() const {
  std::vector<Matrix> out;
  ad::collect_gradients(encoder, out);
  ad::collect_gradients(mu_layer, out);
  ad::collect_gradients(logvar_layer, out);
  ad::collect_gradients(head, out);
  ad::collect_gradients(decoder, out);
  return out;
}

BoundModel bind(Tape& tape, const VariationalClassifier& model) {
  return BoundModel{ad::bind(tape, model.encoder), ad::bind(tape, model.mu_layer),
                    ad::bind(tape, model.logvar_layer), ad::bind(tape, model.head),
                    ad::bind(tape, model.decoder)};
}

LatentPosterior encode(const BoundModel& model, Value x) {
  const Value trunk = ad::forward(model.encoder, x);
  const Value mu = ad::forward(model.mu_layer, trunk);
  const Value logvar = ad::clamp(ad::forward(model.logvar_layer, trunk), kLogvarMin, kLogvarMax);
  return {mu, logvar};
}

Value sample_latent(Value mu, Value logvar, Value eps) {
  if (!mu.data().same_shape(logvar.data()) || !mu.data().same_shape(eps.data()))
    throw DimensionError("sample_latent: mu, logvar and eps must share a shape");
  return mu + ad::exp(ad::scale(logvar, 0.5)) * eps;
}

Value kl_diag_gaussian(Value mu, Value logvar) {
  const Value inner = mu * mu + ad::exp(logvar) - logvar;
  return ad::scale(ad::row_sum(ad::add_scalar(inner, -1.0)), 0.5);
}

Value head_logits(const BoundModel& model, Value z) { return ad::forward(model.head, z); }

Value bce_with_logits(Value logits, Value targets) {
  // softplus(a) − a·y == max(a,0) − a·y + log1p(e^{−|a|})
  return ad::softplus(logits) - logits * targets;
}

double kl_diag_gaussian(std::span<const double> mu, std::span<const double> logvar) {
  if (mu.size() != logvar.size()) throw DimensionError("kl_diag_gaussian: mu/logvar length mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j)
    total += mu[j] * mu[j] + std::exp(logvar[j]) - logvar[j] - 1.0;
  return 0.5 * total;
}

EncodedBatch encode(const VariationalClassifier& model, const Matrix& x) {
  if (x.cols != model.input_dim)
    throw DimensionError("encode: model expects " + std::to_string(model.input_dim) +
                         " features, got " + std::to_string(x.cols));
  Tape tape;
  const BoundModel bound = bind(tape, model);
  const LatentPosterior post = encode(bound, tape.leaf(x));
  return {post.mu.data(), post.logvar.data()};
}

Matrix sample_latent(const Matrix& mu, const Matrix& logvar, const Matrix& eps) {
  Tape tape;
  return sample_latent(tape.leaf(mu), tape.leaf(logvar), tape.leaf(eps)).data();
}

std::vector<Matrix> draw_eps(std::size_t samples, std::size_t rows, std::size_t latent_dim,
                             std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Matrix> out;
  out.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    Matrix e(rows, latent_dim);
    for (double& v : e.data) v = normal(rng);
    out.push_back(std::move(e));
  }
  return out;
}

LossTerms weighted_elbo_terms(const BoundModel& model, Tape& tape, const Matrix& x,
                              std::span<const int> y, std::span<const double> sample_weights,
                              std::span<const Matrix> eps, double beta_rec) {
  const std::size_t n = x.rows;
  if (n == 0) throw ContractError("weighted_elbo_loss: empty batch");
  if (y.size() != n || sample_weights.size() != n)
    throw DimensionError("weighted_elbo_loss: labels/weights do not match batch size");
  if (eps.empty()) throw ContractError("weighted_elbo_loss: at least one epsilon draw is required");
  if (beta_rec > 0.0 && model.decoder.empty())
    throw ContractError("weighted_elbo_loss: beta_rec > 0 requires a decoder");

  Matrix targets(n, 1);
  Matrix weights(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    targets.data[i] = static_cast<double>(y[i]);
    weights.data[i] = sample_weights[i];
  }
  const Value xv = tape.leaf(x);
  const Value yv = tape.leaf(std::move(targets));
  const Value wv = tape.leaf(std::move(weights));

  const LatentPosterior post = encode(model, xv);
  const Value kl = kl_diag_gaussian(post.mu, post.logvar);

  std::optional<Value> fit_term;
  for (const Matrix& e : eps) {
    if (e.rows != n || e.cols != post.mu.cols())
      throw DimensionError("weighted_elbo_loss: epsilon draw " + e.shape_string() + " does not match latent " +
                           post.mu.data().shape_string());
    const Value z = sample_latent(post.mu, post.logvar, tape.leaf(e));
    Value term = bce_with_logits(head_logits(model, z), yv);
    if (beta_rec > 0.0) {
      const Value diff = xv - ad::forward(model.decoder, z);
      term = term + ad::scale(ad::row_sum(diff * diff), beta_rec / static_cast<double>(x.cols));
    }
    fit_term = fit_term ? *fit_term + term : term;
  }
  if (eps.size() > 1) fit_term = ad::scale(*fit_term, 1.0 / static_cast<double>(eps.size()));

  const Value per_sample = *fit_term + kl;
  return {per_sample, ad::mean(wv * per_sample)};
}

Value weighted_elbo_loss(const BoundModel& model, Tape& tape, const Matrix& x, std::span<const int> y,
                         std::span<const double> sample_weights, std::span<const Matrix> eps, double beta_rec) {
  return weighted_elbo_terms(model, tape, x, y, sample_weights, eps, beta_rec).loss;
}

resample::ClassWeights resolve_weights(const ModelConfig& config, std::span<const int> train_labels) {
  resample::ClassWeights w = resample::class_weights(train_labels);
  switch (config.weight_mode) {
    case WeightMode::none: w.w_minority = 1.0; break;
    case WeightMode::ratio: break;
    case WeightMode::custom: w.w_minority = config.custom_minority_weight; break;
  }
  return w;
}

std::vector<double> predict_proba(const VariationalClassifier& model, const Matrix& x) {
  if (x.cols != model.input_dim)
    throw DimensionError("predict_proba: model expects " + std::to_string(model.input_dim) +
                         " features, got " + std::to_string(x.cols));
  Tape tape;
  const BoundModel bound = bind(tape, model);
  const LatentPosterior post = encode(bound, tape.leaf(x));
  const Matrix& logits = head_logits(bound, post.mu).data();
  std::vector<double> p(logits.rows);
  for (std::size_t i = 0; i < logits.rows; ++i) p[i] = ad::stable_sigmoid(logits.data[i]);
  return p;
}

std::string config_to_json(const ModelConfig& c) {
  json j{{"latent_dim", c.latent_dim},
         {"encoder_hidden", c.encoder_hidden},
         {"head_hidden", c.head_hidden},
         {"mc_samples_train", c.mc_samples_train},
         {"beta_rec", c.beta_rec},
         {"weight_mode", std::string(weight_mode_name(c.weight_mode))},
         {"custom_minority_weight", c.custom_minority_weight},
         {"lr", c.lr},
         {"epochs", c.epochs},
         {"batch_size", c.batch_size},
         {"seed", c.seed},
         {"trace_every", c.trace_every}};
  return j.dump();
}

ModelConfig config_from_json(const std::string& text) {
  ModelConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ContractError(std::string("model config: ") + e.what());
  }
  serialize::reject_unknown_keys(j,
                                 {"latent_dim", "encoder_hidden", "head_hidden", "mc_samples_train", "beta_rec",
                                  "weight_mode", "custom_minority_weight", "lr", "epochs", "batch_size", "seed",
                                  "trace_every"},
                                 "model config");
  try {
    if (j.contains("latent_dim")) c.latent_dim = j["latent_dim"].get<std::size_t>();
    if (j.contains("encoder_hidden")) c.encoder_hidden = j["encoder_hidden"].get<std::vector<std::size_t>>();
    if (j.contains("head_hidden")) c.head_hidden = j["head_hidden"].get<std::vector<std::size_t>>();
    if (j.contains("mc_samples_train")) c.mc_samples_train = j["mc_samples_train"].get<std::size_t>();
    if (j.contains("beta_rec")) c.beta_rec = j["beta_rec"].get<double>();
    if (j.contains("weight_mode")) c.weight_mode = parse_weight_mode(j["weight_mode"].get<std::string>());
    if (j.contains("custom_minority_weight")) c.custom_minority_weight = j["custom_minority_weight"].get<double>();
    if (j.contains("lr")) c.lr = j["lr"].get<double>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("trace_every")) c.trace_every = j["trace_every"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw ContractError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string to_json(const VariationalClassifier& model, const std::string& extra_json) {
  json j;
  j["format"] = "imb_dpgm.checkpoint/1";
  j["input_dim"] = model.input_dim;
  j["config"] = json::parse(config_to_json(model.config));
  j["layers"] = {{"encoder", serialize::layers_to_json(model.encoder)},
                 {"mu", serialize::layer_to_json(model.mu_layer)},
                 {"logvar", serialize::layer_to_json(model.logvar_layer)},
                 {"head", serialize::layers_to_json(model.head)},
                 {"decoder", serialize::layers_to_json(model.decoder)}};
  const json extra = json::parse(extra_json);
  for (const auto& [key, value] : extra.items()) j[key] = value;
  return j.dump(2) + "\n";
}

VariationalClassifier model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "imb_dpgm.checkpoint/1")
      throw ParseError("checkpoint: unsupported format", 0);
    VariationalClassifier m;
    m.input_dim = j.at("input_dim").get<std::size_t>();
    m.config = config_from_json(j.at("config").dump());
    const json& layers = j.at("layers");
    m.encoder = serialize::layers_from_json(layers.at("encoder"));
    m.mu_layer = serialize::layer_from_json(layers.at("mu"));
    m.logvar_layer = serialize::layer_from_json(layers.at("logvar"));
    m.head = serialize::layers_from_json(layers.at("head"));
    m.decoder = serialize::layers_from_json(layers.at("decoder"));
    const std::size_t first_in = m.encoder.empty() ? m.mu_layer.in_dim() : m.encoder.front().in_dim();
    if (first_in != m.input_dim) throw ParseError("checkpoint: encoder input does not match input_dim", 0);
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what(), 0);
  }
}

}  // namespace imb::dpgm
