// Operator surface for the codec: train, mktable, filter, hide, extract,
// attack, eval. Exit codes: 0 ok, 2 configuration or input error,
// 3 collision during hide, 4 extraction failures.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gtsd/attack.hpp"
#include "gtsd/bitstring.hpp"
#include "gtsd/codec.hpp"
#include "gtsd/errors.hpp"
#include "gtsd/model.hpp"
#include "gtsd/model_io.hpp"
#include "gtsd/prompt_table.hpp"
#include "gtsd/rng.hpp"
#include "gtsd/session.hpp"
#include "gtsd/train.hpp"

namespace {

using namespace gtsd;

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::vector<std::string>> tokenize_lines(const std::vector<std::string>& lines) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : lines) {
    std::istringstream ss(line);
    std::vector<std::string> toks{std::istream_iterator<std::string>(ss),
                                  std::istream_iterator<std::string>()};
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

std::vector<std::vector<std::string>> read_sentences(const std::string& path) {
  return tokenize_lines(read_lines(path));
}

void write_sentences(const std::string& path, const std::vector<std::vector<std::string>>& sents) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot open " + path + " for writing");
  for (const auto& s : sents) {
    for (size_t i = 0; i < s.size(); ++i) {
      if (i) out << ' ';
      out << s[i];
    }
    out << '\n';
  }
  if (!out) fail(Errc::io_error, "write failed: " + path);
}

void write_text_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot open " + path + " for writing");
  for (const auto& l : lines) out << l << '\n';
  if (!out) fail(Errc::io_error, "write failed: " + path);
}

std::vector<uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::io_error, "write failed: " + path);
}

int parse_int(const std::string& text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    fail(Errc::bad_format, "not an integer: '" + text + "'");
  return value;
}

// A bare count means "evenly spaced skip schedule with that many steps";
// a comma list gives the timesteps verbatim.
std::vector<int> parse_steps_text(const std::string& text, int total_steps) {
  if (text.find(',') == std::string::npos) {
    const int count = parse_int(text);
    return make_skip_steps(total_steps, count);
  }
  std::vector<int> steps;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) steps.push_back(parse_int(item));
  return steps;
}

AnyPromptTable load_table_file(const std::string& path, const Vocab& vocab) {
  std::vector<std::string> lines;
  for (auto& l : read_lines(path))
    if (!l.empty() || l == "---") lines.push_back(l);
  const bool extended = std::find(lines.begin(), lines.end(), "---") != lines.end();
  if (extended) return ExtendedPromptTable::load(lines, vocab);
  return PromptTable::load(lines, vocab);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Flags shared by every command that opens a session. Values from --session
// are the base; explicit flags override field by field.
struct SessionFlags {
  CLI::App* sub = nullptr;
  std::string session_file, model_path, table_path, steps_text;
  uint64_t seed = 0, k = 0;
  int l_min = 5, l_max = 25;
  int threads = 1;

  void attach(CLI::App* s) {
    sub = s;
    s->add_option("--session", session_file, "session file holding the shared parameters");
    s->add_option("--model", model_path, "model file");
    s->add_option("--table", table_path, "prompt table file");
    s->add_option("--seed", seed, "shared session seed");
    s->add_option("--k", k, "candidate batch size, power of two");
    s->add_option("--lmin", l_min, "minimum sentence length");
    s->add_option("--lmax", l_max, "maximum sentence length");
    s->add_option("--steps", steps_text, "inference steps: a count or a comma-separated list");
    s->add_option("--threads", threads, "worker threads for batch generation");
  }

  SessionConfig base_config() const {
    SessionConfig cfg;
    if (sub->count("--session")) cfg = load_session_file(session_file);
    if (sub->count("--model")) cfg.model_path = model_path;
    if (sub->count("--table")) cfg.table_path = table_path;
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--k")) cfg.k = k;
    if (sub->count("--lmin")) cfg.l_min = l_min;
    if (sub->count("--lmax")) cfg.l_max = l_max;
    return cfg;
  }

  void resolve_steps(SessionConfig& cfg, int total_steps) const {
    if (sub->count("--steps")) cfg.steps = parse_steps_text(steps_text, total_steps);
    if (cfg.steps.empty())
      cfg.steps = make_skip_steps(total_steps, std::min(50, total_steps));
  }
};

struct LoadedSession {
  DiffusionModel model;
  SessionConfig cfg;
  int threads;
};

LoadedSession open_session(const SessionFlags& flags) {
  SessionConfig cfg = flags.base_config();
  if (cfg.model_path.empty()) fail(Errc::bad_format, "a model file is required (--model)");
  if (cfg.table_path.empty()) fail(Errc::bad_format, "a prompt table is required (--table)");
  LoadedSession out{load_model(cfg.model_path), cfg, flags.threads};
  flags.resolve_steps(out.cfg, out.model.sched.steps());
  return out;
}

int cmd_train(const std::string& corpus_path, const std::string& out_path, uint64_t seed,
              TrainConfig tc) {
  const auto corpus = read_sentences(corpus_path);
  std::vector<double> losses;
  const DiffusionModel model = train(corpus, tc, seed, &losses);
  for (size_t i = 0; i < losses.size(); ++i)
    std::cout << "epoch " << (i + 1) << " loss " << fmt(losses[i]) << '\n';
  save_model(model, out_path);
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

int cmd_mktable(const std::string& corpus_path, const std::string& model_path,
                const std::string& out_path, uint64_t capacity) {
  const DiffusionModel model = load_model(model_path);
  const auto corpus = read_sentences(corpus_path);
  std::vector<Prompt> entries;
  std::set<std::array<std::string, 3>> seen;
  for (const auto& s : corpus) {
    if (s.size() < 3) continue;
    std::array<std::string, 3> tri{s[0], s[1], s[2]};
    bool known = true;
    for (const auto& t : tri) known = known && model.vocab.contains(t);
    if (!known || !seen.insert(tri).second) continue;
    entries.push_back(Prompt{tri});
  }
  if (entries.size() < capacity)
    fail(Errc::table_too_small, "corpus yields " + std::to_string(entries.size()) +
                                    " distinct leading trigrams, need " +
                                    std::to_string(capacity));
  entries.resize(capacity);
  const PromptTable table = PromptTable::from_prompts(entries, model.vocab);
  write_text_lines(out_path, table.to_lines());
  std::cout << "wrote " << out_path << " with " << table.capacity() << " prompts\n";
  return 0;
}

int cmd_filter(const SessionFlags& flags, const std::string& out_path, int trials) {
  LoadedSession ls = open_session(flags);
  validate_session(ls.cfg);
  for (int t : ls.cfg.steps) ls.model.sched.check_step(t);

  const AnyPromptTable any = load_table_file(ls.cfg.table_path, ls.model.vocab);
  const PromptTable* flat = std::get_if<PromptTable>(&any);
  if (!flat) fail(Errc::bad_format, "filtration needs a flat one-prompt-per-line table");

  const int span = ls.cfg.l_max - ls.cfg.l_min + 1;
  FiltrationGenerator gen = [&](const Prompt& p, int trial) {
    const uint64_t trial_seed =
        CounterRng::stream_key(ls.cfg.seed, "flt" + std::to_string(trial));
    const LatentBatch lat = sample_latents(trial_seed, static_cast<int>(ls.cfg.k),
                                           ls.model.L, ls.model.d());
    const ConditionalPrompt cond{p, ls.cfg.l_min + trial % span};
    return sample_batch(ls.model, cond, lat, ls.cfg.steps, ls.threads).sentences;
  };
  const PromptTable kept = filter_prompts(gen, *flat, ls.model.vocab, trials);
  write_text_lines(out_path, kept.to_lines());
  std::cout << "kept " << kept.capacity() << " of " << flat->capacity() << " prompts\n";
  return 0;
}

int cmd_hide(const SessionFlags& flags, const std::string& payload_path,
             const std::string& out_path, long long bits_override,
             const std::string& write_session_path) {
  LoadedSession ls = open_session(flags);
  const AnyPromptTable table = load_table_file(ls.cfg.table_path, ls.model.vocab);
  const Session session(&ls.model, table, ls.cfg, ls.threads);

  const std::vector<uint8_t> payload = read_bytes(payload_path);
  const size_t bit_count =
      bits_override >= 0 ? static_cast<size_t>(bits_override) : payload.size() * 8;
  const BitString framed = frame_payload(bits_from_bytes(payload, bit_count));

  const auto t0 = std::chrono::steady_clock::now();
  const StegoSet stego = session.hide(framed);
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;

  write_sentences(out_path, stego.sentences);
  if (!write_session_path.empty()) save_session_file(session.config(), write_session_path);

  std::cout << "sentences=" << stego.sentences.size() << '\n';
  std::cout << "bpw=" << fmt(bpw(stego, session.spec())) << '\n';
  const double per = stego.sentences.empty()
                         ? 0.0
                         : dt.count() / static_cast<double>(stego.sentences.size());
  std::cout << "seconds_per_sentence=" << fmt(per) << '\n';
  return 0;
}

int cmd_extract(const SessionFlags& flags, const std::string& stego_path,
                const std::string& out_path) {
  LoadedSession ls = open_session(flags);
  const AnyPromptTable table = load_table_file(ls.cfg.table_path, ls.model.vocab);
  const Session session(&ls.model, table, ls.cfg, ls.threads);

  const auto sentences = read_sentences(stego_path);
  const ExtractionResult res = session.extract(sentences);
  for (const auto& err : res.errors)
    std::cerr << "sentence " << err.ordinal << ": " << err.message << '\n';

  std::vector<uint8_t> payload;
  try {
    payload = bytes_from_bits(unframe_payload(res.bits));
  } catch (const Error& e) {
    std::cerr << "payload framing unusable: " << e.what() << '\n';
    write_bytes(out_path, {});
    return 4;
  }
  write_bytes(out_path, payload);
  std::cout << "sentences=" << sentences.size() << '\n';
  std::cout << "payload_bytes=" << payload.size() << '\n';
  return res.errors.empty() ? 0 : 4;
}

int cmd_attack(const std::string& stego_path, const std::string& model_path,
               const std::string& out_prefix, int n, int rounds, bool protect_prompt,
               uint64_t seed) {
  if (rounds < 1) fail(Errc::bad_range, "rounds must be >= 1");
  const DiffusionModel model = load_model(model_path);
  const auto sentences = read_sentences(stego_path);
  for (int r = 1; r <= rounds; ++r) {
    CounterRng rng(seed, "atk." + std::to_string(n) + "." + std::to_string(r));
    std::vector<std::vector<std::string>> attacked;
    attacked.reserve(sentences.size());
    for (size_t i = 0; i < sentences.size(); ++i) {
      try {
        attacked.push_back(random_replace(sentences[i], n, protect_prompt, model.vocab, rng));
      } catch (const Error& e) {
        std::cerr << "sentence " << i << ": " << e.what() << ", passed through\n";
        attacked.push_back(sentences[i]);
      }
    }
    write_sentences(out_prefix + ".n" + std::to_string(n) + ".r" + std::to_string(r) + ".txt",
                    attacked);
  }
  std::cout << "wrote " << rounds << " attacked copies\n";
  return 0;
}

int cmd_eval(const SessionFlags& flags, const std::string& cover_path,
             const std::string& stego_path, const std::string& attacked_prefix,
             const std::string& n_list_text, int rounds, const std::string& report_path) {
  LoadedSession ls = open_session(flags);
  const AnyPromptTable table = load_table_file(ls.cfg.table_path, ls.model.vocab);
  const Session session(&ls.model, table, ls.cfg, ls.threads);

  const auto stego_sentences = read_sentences(stego_path);
  if (stego_sentences.empty()) fail(Errc::empty_set, "stego file has no sentences");

  ExtractionResult reference;
  const double ref_seconds = timing(
      [&] { reference = session.extract(stego_sentences); }, stego_sentences.size());
  for (const auto& err : reference.errors)
    std::cerr << "reference sentence " << err.ordinal << ": " << err.message << '\n';

  const unsigned seg_bits = session.spec().segment_bits();
  const size_t count = stego_sentences.size();
  std::set<size_t> ref_bad;
  for (const auto& err : reference.errors) ref_bad.insert(err.ordinal);

  std::vector<std::string> report;
  report.push_back("sentences=" + std::to_string(count));
  report.push_back("segment_bits=" + std::to_string(seg_bits));
  report.push_back("bpw=" + fmt(bpw(StegoSet{stego_sentences, 0}, session.spec())));

  const auto cover_sentences = read_sentences(cover_path);
  std::vector<Eigen::VectorXd> cover_vecs, stego_vecs;
  for (const auto& s : cover_sentences)
    cover_vecs.push_back(embed_sentence(s, ls.model.vocab, ls.model.embedding));
  for (const auto& s : stego_sentences)
    stego_vecs.push_back(embed_sentence(s, ls.model.vocab, ls.model.embedding));
  report.push_back("kld_standard=" + fmt(kld(cover_vecs, stego_vecs, KldVariant::standard)));
  report.push_back("kld_paper=" + fmt(kld(cover_vecs, stego_vecs, KldVariant::paper)));

  if (!attacked_prefix.empty()) {
    std::vector<int> ns;
    std::string item;
    std::istringstream ss(n_list_text);
    while (std::getline(ss, item, ',')) ns.push_back(parse_int(item));
    if (ns.empty()) fail(Errc::bad_format, "--n-list is empty");
    for (int n : ns) {
      std::vector<uint64_t> correct_counts;
      for (int r = 1; r <= rounds; ++r) {
        const std::string path =
            attacked_prefix + ".n" + std::to_string(n) + ".r" + std::to_string(r) + ".txt";
        const auto attacked = read_sentences(path);
        if (attacked.size() != count)
          fail(Errc::length_mismatch, path + ": expected " + std::to_string(count) +
                                          " sentences, got " + std::to_string(attacked.size()));
        const ExtractionResult res = session.extract(attacked);
        std::set<size_t> bad;
        for (const auto& err : res.errors) bad.insert(err.ordinal);
        uint64_t correct = 0;
        for (size_t i = 0; i < count; ++i) {
          if (bad.count(i) || ref_bad.count(i)) continue;
          if (res.bits.slice(i * seg_bits, seg_bits) ==
              reference.bits.slice(i * seg_bits, seg_bits))
            ++correct;
        }
        correct_counts.push_back(correct);
      }
      std::string joined;
      for (size_t i = 0; i < correct_counts.size(); ++i) {
        if (i) joined += ',';
        joined += std::to_string(correct_counts[i]);
      }
      report.push_back("cn_n" + std::to_string(n) + "=" + joined);
      report.push_back("acer_n" + std::to_string(n) + "=" + fmt(acer(correct_counts, count)));
    }
  }

  // Timing goes last so everything above is byte-stable across runs.
  report.push_back("mean_seconds_per_sentence=" + fmt(ref_seconds));

  for (const auto& line : report) std::cout << line << '\n';
  if (!report_path.empty()) write_text_lines(report_path, report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"text steganography codec: hide bitstreams in generated sentences"};
  app.require_subcommand(1);

  // train
  auto* train_sub = app.add_subcommand("train", "fit the toy diffusion model on a corpus");
  std::string tr_corpus, tr_out;
  uint64_t tr_seed = 42;
  TrainConfig tc;
  std::string tr_schedule = "linear";
  train_sub->add_option("--corpus", tr_corpus, "training corpus, one sentence per line")
      ->required();
  train_sub->add_option("--out", tr_out, "output model file")->required();
  train_sub->add_option("--seed", tr_seed, "training seed");
  train_sub->add_option("--epochs", tc.epochs, "training epochs");
  train_sub->add_option("--batch", tc.batch, "sentences per optimizer step");
  train_sub->add_option("--lr", tc.lr, "learning rate");
  train_sub->add_option("--dim", tc.net.d, "embedding dimension");
  train_sub->add_option("--hidden", tc.net.hidden, "denoiser trunk width");
  train_sub->add_option("--layers", tc.net.trunk_layers, "denoiser trunk layers");
  train_sub->add_option("--time-dim", tc.net.time_dim, "time embedding size");
  train_sub->add_option("--pos-dim", tc.net.pos_dim, "position embedding size");
  train_sub->add_option("--schedule-steps", tc.schedule_steps, "diffusion steps T");
  train_sub->add_option("--schedule", tr_schedule, "noise schedule: linear or cosine")
      ->check(CLI::IsMember({"linear", "cosine"}));
  train_sub->add_option("--max-len", tc.L, "position capacity L");
  train_sub->add_flag_callback("--freeze-embedding", [&] { tc.train_embedding = false; },
                               "train the denoiser only");

  // mktable
  auto* mktable_sub =
      app.add_subcommand("mktable", "build a prompt table from corpus leading trigrams");
  std::string mk_corpus, mk_model, mk_out;
  uint64_t mk_capacity = 64;
  mktable_sub->add_option("--corpus", mk_corpus, "corpus file")->required();
  mktable_sub->add_option("--model", mk_model, "model file supplying the vocabulary")->required();
  mktable_sub->add_option("--out", mk_out, "output table file")->required();
  mktable_sub->add_option("--capacity", mk_capacity, "table size, power of two");

  // filter
  auto* filter_sub =
      app.add_subcommand("filter", "drop prompts the generator does not keep verbatim");
  SessionFlags filter_flags;
  filter_flags.attach(filter_sub);
  std::string fl_out;
  int fl_trials = 3;
  filter_sub->add_option("--out", fl_out, "output table file")->required();
  filter_sub->add_option("--trials", fl_trials, "seeded generations per prompt");

  // hide
  auto* hide_sub = app.add_subcommand("hide", "embed a payload file as stego sentences");
  SessionFlags hide_flags;
  hide_flags.attach(hide_sub);
  std::string hd_payload, hd_out, hd_write_session;
  long long hd_bits = -1;
  hide_sub->add_option("--payload", hd_payload, "payload file, raw bytes")->required();
  hide_sub->add_option("--out", hd_out, "output stego file, one sentence per line")->required();
  hide_sub->add_option("--bits", hd_bits, "hide only the first N bits of the payload");
  hide_sub->add_option("--write-session", hd_write_session,
                       "save the resolved session parameters to this file");

  // extract
  auto* extract_sub = app.add_subcommand("extract", "recover the payload from stego sentences");
  SessionFlags extract_flags;
  extract_flags.attach(extract_sub);
  std::string ex_stego, ex_out;
  extract_sub->add_option("--stego", ex_stego, "stego file")->required();
  extract_sub->add_option("--out", ex_out, "output payload file")->required();

  // attack
  auto* attack_sub = app.add_subcommand("attack", "random word replacement over a stego file");
  std::string at_stego, at_model, at_prefix;
  int at_n = 1, at_rounds = 10;
  bool at_protect = false;
  uint64_t at_seed = 0;
  attack_sub->add_option("--stego", at_stego, "stego file to attack")->required();
  attack_sub->add_option("--model", at_model, "model file supplying the vocabulary")->required();
  attack_sub->add_option("--out-prefix", at_prefix, "attacked copies go to PREFIX.nN.rR.txt")
      ->required();
  attack_sub->add_option("--n", at_n, "replacements per sentence");
  attack_sub->add_option("--rounds", at_rounds, "independent attacked copies");
  attack_sub->add_flag("--protect-prompt", at_protect, "never replace the 3 prompt tokens");
  attack_sub->add_option("--seed", at_seed, "attack randomness seed");

  // eval
  auto* eval_sub = app.add_subcommand("eval", "capacity, divergence, and robustness report");
  SessionFlags eval_flags;
  eval_flags.attach(eval_sub);
  std::string ev_cover, ev_stego, ev_prefix, ev_nlist = "1", ev_report;
  int ev_rounds = 10;
  eval_sub->add_option("--cover", ev_cover, "cover sentences for the divergence baseline")
      ->required();
  eval_sub->add_option("--stego", ev_stego, "stego file")->required();
  eval_sub->add_option("--attacked-prefix", ev_prefix,
                       "read attacked copies from PREFIX.nN.rR.txt");
  eval_sub->add_option("--n-list", ev_nlist, "comma-separated n values to score");
  eval_sub->add_option("--rounds", ev_rounds, "attacked copies per n");
  eval_sub->add_option("--report", ev_report, "also write the report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train_sub->parsed()) {
      if (train_sub->count("--schedule"))
        tc.schedule_kind = tr_schedule == "cosine" ? ScheduleKind::cosine : ScheduleKind::linear;
      return cmd_train(tr_corpus, tr_out, tr_seed, tc);
    }
    if (mktable_sub->parsed()) return cmd_mktable(mk_corpus, mk_model, mk_out, mk_capacity);
    if (filter_sub->parsed()) return cmd_filter(filter_flags, fl_out, fl_trials);
    if (hide_sub->parsed())
      return cmd_hide(hide_flags, hd_payload, hd_out, hd_bits, hd_write_session);
    if (extract_sub->parsed()) return cmd_extract(extract_flags, ex_stego, ex_out);
    if (attack_sub->parsed())
      return cmd_attack(at_stego, at_model, at_prefix, at_n, at_rounds, at_protect, at_seed);
    if (eval_sub->parsed())
      return cmd_eval(eval_flags, ev_cover, ev_stego, ev_prefix, ev_nlist, ev_rounds, ev_report);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == Errc::collision_detected ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
