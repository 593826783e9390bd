#include "gtsd/attack.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace gtsd {

std::vector<std::string> random_replace(const std::vector<std::string>& sentence, int n,
                                        bool protect_prompt, const Vocab& vocab,
                                        CounterRng& rng) {
  require(n >= 0, Errc::bad_range, "replacement count must be non-negative");
  std::vector<std::string> out = sentence;
  if (n == 0) return out;

  const size_t first = protect_prompt ? 3 : 0;
  const size_t attackable = sentence.size() > first ? sentence.size() - first : 0;
  require(static_cast<size_t>(n) <= attackable, Errc::not_enough_positions,
          "cannot replace " + std::to_string(n) + " of " + std::to_string(attackable) +
              " attackable positions");

  std::vector<size_t> pool(attackable);
  for (size_t i = 0; i < attackable; ++i) pool[i] = first + i;
  for (int i = 0; i < n; ++i) {
    const size_t j = static_cast<size_t>(i) + rng.next_below(attackable - static_cast<size_t>(i));
    std::swap(pool[static_cast<size_t>(i)], pool[j]);
    const size_t pos = pool[static_cast<size_t>(i)];
    std::string replacement;
    do {
      replacement = vocab.token(static_cast<TokenId>(rng.next_below(vocab.size())));
    } while (replacement == out[pos]);
    out[pos] = replacement;
  }
  return out;
}

double acer(const std::vector<uint64_t>& correct_counts, uint64_t sentences_per_round) {
  require(!correct_counts.empty(), Errc::bad_counts, "no attack rounds");
  require(sentences_per_round >= 1, Errc::bad_counts, "sentences per round must be positive");
  uint64_t total = 0;
  for (uint64_t c : correct_counts) {
    require(c <= sentences_per_round, Errc::bad_counts,
            "correct count exceeds sentences per round");
    total += c;
  }
  return static_cast<double>(total) /
         (static_cast<double>(sentences_per_round) * static_cast<double>(correct_counts.size()));
}

double bpw(const StegoSet& stego, const SegmentSpec& spec) {
  require(!stego.sentences.empty(), Errc::empty_set, "no stego sentences");
  size_t tokens = 0;
  for (const auto& s : stego.sentences) tokens += s.size();
  const double mean_len = static_cast<double>(tokens) / static_cast<double>(stego.sentences.size());
  return static_cast<double>(spec.segment_bits()) / mean_len;
}

double kld_gaussian_term(double mu_c, double sigma_c, double mu_s, double sigma_s,
                         KldVariant variant) {
  const double shift = (mu_c - mu_s) * (mu_c - mu_s);
  const double denom = variant == KldVariant::standard ? 2.0 * sigma_s * sigma_s : 2.0 * sigma_s;
  return std::log(sigma_s / sigma_c) + (sigma_c * sigma_c + shift) / denom - 0.5;
}

namespace {
struct Moments {
  Eigen::VectorXd mean;
  Eigen::VectorXd sigma;  // population standard deviation
};

Moments fit(const std::vector<Eigen::VectorXd>& vecs, Eigen::Index dim) {
  Moments m;
  m.mean = Eigen::VectorXd::Zero(dim);
  for (const auto& v : vecs) {
    require(v.size() == dim, Errc::shape_mismatch, "sentence vectors differ in dimension");
    m.mean += v;
  }
  m.mean /= static_cast<double>(vecs.size());
  Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
  for (const auto& v : vecs) var += (v - m.mean).cwiseAbs2();
  var /= static_cast<double>(vecs.size());
  m.sigma = var.cwiseSqrt();
  return m;
}
}  // namespace

double kld(const std::vector<Eigen::VectorXd>& cover_vecs,
           const std::vector<Eigen::VectorXd>& stego_vecs, KldVariant variant) {
  require(!cover_vecs.empty() && !stego_vecs.empty(), Errc::empty_set,
          "both embedding sets must be nonempty");
  const Eigen::Index dim = cover_vecs[0].size();
  const Moments cover = fit(cover_vecs, dim);
  const Moments stego = fit(stego_vecs, dim);

  double total = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double sc = cover.sigma[i];
    const double ss = stego.sigma[i];
    if (sc < 1e-9 || ss < 1e-9) {
      // constant on both sides with the same value carries no divergence
      if (sc < 1e-9 && ss < 1e-9 && std::abs(cover.mean[i] - stego.mean[i]) <= 1e-9) continue;
      fail(Errc::degenerate_variance,
           "near-zero standard deviation in dimension " + std::to_string(i));
    }
    total += kld_gaussian_term(cover.mean[i], sc, stego.mean[i], ss, variant);
  }
  return total;
}

double timing(const std::function<void()>& run, size_t count) {
  require(count >= 1, Errc::bad_range, "timing needs a positive sentence count");
  const auto start = std::chrono::steady_clock::now();
  run();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count() / static_cast<double>(count);
}

}  // namespace gtsd
