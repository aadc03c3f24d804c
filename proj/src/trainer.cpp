#include "imb/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace imb::dpgm {
namespace {

constexpr std::uint64_t kTrainStream = 0x7a11'0b5e'cafeULL;
constexpr std::uint64_t kTrainEvalStream = 0xe7a1'0001ULL;
constexpr std::uint64_t kValEvalStream = 0xe7a1'0002ULL;

adversary::Batch make_batch(const data::Dataset& ds, std::span<const std::size_t> rows,
                            const resample::ClassWeights& weights, std::size_t mc_samples,
                            std::size_t latent_dim, std::mt19937_64& rng) {
  adversary::Batch b;
  b.x = Matrix(rows.size(), ds.dim());
  b.y.reserve(rows.size());
  b.weights.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(ds.features.row(rows[r]).begin(), ds.dim(), b.x.row(r).begin());
    b.y.push_back(ds.labels[rows[r]]);
    b.weights.push_back(weights.weight_for(ds.labels[rows[r]]));
  }
  b.eps = draw_eps(mc_samples, rows.size(), latent_dim, rng);
  return b;
}

}  // namespace

double evaluate_loss(const VariationalClassifier& model, const data::Dataset& ds,
                     const resample::ClassWeights& weights, std::uint64_t eps_seed) {
  std::mt19937_64 rng(eps_seed);
  const auto eps = draw_eps(model.config.mc_samples_train, ds.size(), model.latent_dim(), rng);
  const auto w = weights.per_sample(ds.labels);
  ad::Tape tape;
  const BoundModel bound = bind(tape, model);
  return weighted_elbo_loss(bound, tape, ds.features, ds.labels, w, eps, model.config.beta_rec).item();
}

FitResult fit(const data::Dataset& train, const data::Dataset& val, const ModelConfig& config,
              const adversary::AdvConfig& adv) {
  config.validate();
  adv.validate();
  if (train.size() == 0) throw ContractError("fit: empty training set");
  if (val.size() == 0) throw ContractError("fit: empty validation set");
  if (val.dim() != train.dim()) throw DimensionError("fit: validation features differ from training features");

  FitResult result;
  result.weights = resolve_weights(config, train.labels);
  result.model = make_model(train.dim(), config);
  result.adv_config = adv;
  if (adv.enabled) result.adversary = adversary::make_adversary(config.latent_dim, adv, config.lr, config.seed);
  if (config.epochs == 0) return result;

  auto params = result.model.parameters();
  ad::AdamState opt = ad::make_adam(params, config.lr);
  std::mt19937_64 rng(config.seed ^ kTrainStream);

  auto record = [&](std::size_t iteration) {
    const double tr = evaluate_loss(result.model, train, result.weights, config.seed ^ kTrainEvalStream);
    const double te = evaluate_loss(result.model, val, result.weights, config.seed ^ kValEvalStream);
    if (!std::isfinite(tr) || !std::isfinite(te))
      throw DivergenceError("fit: non-finite loss at iteration " + std::to_string(iteration), result);
    result.trace.records.push_back({iteration, tr, te});
  };

  record(0);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t iteration = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const adversary::Batch batch =
          make_batch(train, std::span(order).subspan(start, end - start), result.weights,
                     config.mc_samples_train, config.latent_dim, rng);
      try {
        if (result.adversary)
          adversary::augmented_training_step(result.model, opt, batch, result.weights.w_minority,
                                             result.weights.minority_label, *result.adversary, adv);
        else
          adversary::classifier_step(result.model, opt, batch, Matrix(), 0.0);
      } catch (const NumericError& e) {
        result.iterations = iteration;
        throw DivergenceError("fit: training diverged at iteration " + std::to_string(iteration + 1) + ": " +
                                  e.what(),
                              result);
      }
      ++iteration;
      result.iterations = iteration;
      if (config.trace_every > 0 && iteration % config.trace_every == 0) record(iteration);
    }
    if (config.trace_every == 0) record(iteration);
  }
  if (result.trace.records.back().iteration != iteration) record(iteration);
  return result;
}

}  // namespace imb::dpgm
