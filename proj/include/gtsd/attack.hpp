#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "gtsd/codec.hpp"
#include "gtsd/rng.hpp"
#include "gtsd/vocab.hpp"

namespace gtsd {

struct AttackConfig {
  int n = 0;                   // replacements per sentence
  bool protect_prompt = false; // leave positions 0..2 intact
  int rounds = 10;
  uint64_t seed = 0;
};

/// Replaces n distinct positions (excluding 0..2 when protect_prompt) with
/// uniformly random vocabulary tokens different from the originals.
std::vector<std::string> random_replace(const std::vector<std::string>& sentence, int n,
                                        bool protect_prompt, const Vocab& vocab, CounterRng& rng);

/// Sum of per-round correct counts over rounds x sentences_per_round.
double acer(const std::vector<uint64_t>& correct_counts, uint64_t sentences_per_round);

/// (log2 k + log2 p_c) / mean sentence length, prompt tokens included.
double bpw(const StegoSet& stego, const SegmentSpec& spec);

enum class KldVariant {
  standard,  // textbook Gaussian KL, squared sigma_s denominator
  paper,     // verbatim form: denominator 2*sigma_s, unsquared
};

/// One dimension's KL(cover || stego) contribution under the chosen variant.
double kld_gaussian_term(double mu_c, double sigma_c, double mu_s, double sigma_s,
                         KldVariant variant);

/// Fits a per-dimension Gaussian (population standard deviation) to each set
/// and sums the per-dimension terms. Dimensions degenerate on both sides
/// with equal means contribute 0; any other near-zero sigma is an error.
double kld(const std::vector<Eigen::VectorXd>& cover_vecs,
           const std::vector<Eigen::VectorXd>& stego_vecs, KldVariant variant);

/// Wall-clock seconds of run(), divided by count.
double timing(const std::function<void()>& run, size_t count);

}  // namespace gtsd
