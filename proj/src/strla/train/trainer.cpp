#include "strla/train/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "strla/error.hpp"

namespace strla::train {

std::vector<std::string> TrainConfig::problems() const {
  std::vector<std::string> out;
  if (epochs < 1) out.push_back("epochs must be >= 1");
  if (batch_size < 1) out.push_back("batch_size must be >= 1");
  if (hidden < 1) out.push_back("hidden width must be >= 1");
  if (layers < 0) out.push_back("layers must be >= 0");
  if (folds < 2) out.push_back("folds must be >= 2");
  if (threads < 1) out.push_back("threads must be >= 1");
  if (!(adam.learning_rate > 0.0)) out.push_back("learning_rate must be > 0");
  if (adam.beta1 < 0.0 || adam.beta1 >= 1.0 || adam.beta2 < 0.0 || adam.beta2 >= 1.0)
    out.push_back("Adam betas must lie in [0, 1)");
  if (!(adam.epsilon > 0.0)) out.push_back("Adam epsilon must be > 0");
  return out;
}

void TrainConfig::validate() const {
  auto p = problems();
  if (p.empty()) return;
  std::string msg = p.front();
  for (std::size_t i = 1; i < p.size(); ++i) msg += "; " + p[i];
  throw Error(ErrorCode::Config, msg);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> salts) {
  // splitmix64 chain
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  for (std::uint64_t s : salts) h = mix(h ^ mix(s));
  return h;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, {0x5348u, static_cast<std::uint64_t>(epoch)}));
  // Fisher-Yates with an explicit draw so the order does not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

double example_gradient(const ad::ParameterStore& store, const ForwardFn& forward, std::size_t index, int label,
                        std::mt19937_64* rng, ad::Gradients& grads) {
  ad::Tape tape(store);
  ad::NodeId z = forward(tape, index, rng);
  ad::NodeId loss = tape.softmax_cross_entropy(z, label);
  tape.backward(loss);
  tape.accumulate_into(grads);
  return tape.scalar(loss);
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(count);
  for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

TrainResult train_loop(ad::ParameterStore& store, const std::vector<int>& labels, const TrainConfig& config,
                       const ForwardFn& forward, Adam& optimizer) {
  config.validate();
  const std::size_t n = labels.size();
  if (n == 0) throw Error(ErrorCode::Config, "training set is empty");
  TrainResult result;
  const auto bs = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<std::size_t> order = epoch_order(n, config.seed, epoch);
    int batch_no = 0;
    for (std::size_t start = 0; start < n; start += bs) {
      std::size_t len = std::min(bs, n - start);
      std::vector<ad::Gradients> per_example(len);
      std::vector<double> losses(len, 0.0);
      auto run = [&](std::size_t k) {
        std::size_t idx = order[start + k];
        std::mt19937_64 rng(derive_seed(config.seed, {0x4155u, static_cast<std::uint64_t>(epoch), idx}));
        try {
          losses[k] = example_gradient(store, forward, idx, labels[idx], &rng, per_example[k]);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NonFinite) throw;
          throw Error(ErrorCode::NonFinite, "non-finite loss at epoch " + std::to_string(epoch + 1) + ", example " +
                                                std::to_string(idx) + ": " + e.what());
        }
      };
      parallel_for(len, config.threads, run);

      ad::Gradients total;
      double loss_sum = 0.0;
      for (std::size_t k = 0; k < len; ++k) {
        total.merge(per_example[k]);
        loss_sum += losses[k];
      }
      optimizer.step(store, total);
      ++result.steps;
      result.batches.push_back({epoch + 1, ++batch_no, loss_sum / static_cast<double>(len)});
    }
  }
  return result;
}

Evaluation evaluate(const std::function<int(std::size_t)>& predict, const std::vector<int>& labels, int classes,
                    int threads) {
  Evaluation ev;
  const std::size_t n = labels.size();
  ev.predictions.assign(n, -1);
  parallel_for(n, threads, [&](std::size_t i) { ev.predictions[i] = predict(i); });
  ev.confusion.assign(static_cast<std::size_t>(classes), std::vector<std::int64_t>(static_cast<std::size_t>(classes), 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    int y = labels[i];
    int p = ev.predictions[i];
    if (y >= 0) {
      ev.confusion[static_cast<std::size_t>(y)][static_cast<std::size_t>(p)] += 1;
      if (y == p) ++correct;
    }
  }
  ev.accuracy = n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
  return ev;
}

}  // namespace strla::train
