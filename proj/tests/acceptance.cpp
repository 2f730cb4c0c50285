// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.
//
//   acceptance [path-to-epigraph-cli]

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "epigraph/denoise.hpp"
#include "epigraph/glcm.hpp"
#include "epigraph/haralick.hpp"
#include "epigraph/nn.hpp"
#include "epigraph/pipeline.hpp"
#include "epigraph/segment.hpp"
#include "epigraph/synthetic.hpp"
#include "oracles.hpp"

using namespace epigraph;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Outcome haralick_oracle() {
  std::mt19937_64 rng(20240601);
  const auto t0 = Clock::now();
  double worst = 0;
  for (int n = 0; n < 1000; ++n) {
    const int L = 2 + n % 5;  // 2..6 levels
    const auto grid = oracle::random_glcm(rng, L, 0.3, n % 2 == 0);
    const auto ref = oracle::haralick(grid);
    const auto got = features(glcm_from_probabilities(oracle::to_matrix(grid))).values();
    for (int i = 0; i < 13; ++i) worst = std::max(worst, std::abs(got[i] - ref.f[i]) / std::max(1.0, std::abs(ref.f[i])));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 10, fmt::format("1000 GLCMs, max error {:.2e} (<= 1e-9), {:.2f} s (< 10 s)", worst, secs)};
}

Outcome mcc_spectrum() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0, 1);
  double indep_worst = 0, perm_worst = 0, row_worst = 0;
  double lo = 1, hi = 0;

  for (int n = 0; n < 1000; ++n) {
    const int L = 2 + n % 7;
    std::vector<double> a(L), b(L);
    for (int i = 0; i < L; ++i) {
      a[i] = u(rng) < 0.2 ? 0 : u(rng);
      b[i] = u(rng) < 0.2 ? 0 : u(rng);
    }
    a[0] += 0.01;
    b[0] += 0.01;
    const double sa = std::accumulate(a.begin(), a.end(), 0.0), sb = std::accumulate(b.begin(), b.end(), 0.0);
    oracle::Grid g(L, std::vector<double>(L));
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < L; ++j) g[i][j] = a[i] / sa * b[j] / sb;
    indep_worst = std::max(indep_worst, std::abs(mcc(glcm_from_probabilities(oracle::to_matrix(g)))));
  }

  for (int n = 0; n < 1000; ++n) {
    const int L = 2 + n % 7;
    std::vector<int> order(L);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> sigma(L);
    for (int i = 0; i + 1 < L; i += 2) {
      sigma[order[i]] = order[i + 1];
      sigma[order[i + 1]] = order[i];
    }
    if (L % 2) sigma[order[L - 1]] = order[L - 1];
    oracle::Grid g(L, std::vector<double>(L, 0));
    double total = 0;
    for (int i = 0; i < L; ++i)
      if (i <= sigma[i]) {
        const double w = 0.05 + u(rng);
        g[i][sigma[i]] = w;
        g[sigma[i]][i] = w;
        total += (i == sigma[i]) ? w : 2 * w;
      }
    for (auto& r : g)
      for (double& v : r) v /= total;
    perm_worst = std::max(perm_worst, std::abs(mcc(glcm_from_probabilities(oracle::to_matrix(g))) - 1.0));
  }

  for (int n = 0; n < 10000; ++n) {
    const auto grid = oracle::random_glcm(rng, 2 + n % 9, 0.4, n % 2 == 0);
    const Glcm g = glcm_from_probabilities(oracle::to_matrix(grid));
    const double m = mcc(g);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
    const QMatrix q = q_matrix(g);
    for (int i = 0; i < q.q.rows(); ++i) row_worst = std::max(row_worst, std::abs(q.q.row(i).sum() - 1.0));
  }
  const bool pass = indep_worst <= 1e-9 && perm_worst <= 1e-9 && lo >= 0 && hi <= 1 && row_worst <= 1e-9;
  return {pass, fmt::format("independent |mcc| <= {:.1e}, permutation |mcc-1| <= {:.1e}, "
                            "10000 random mcc in [{:.4f}, {:.4f}], Q row-sum error {:.1e}",
                            indep_worst, perm_worst, lo, hi, row_worst)};
}

Outcome glcm_brute_force() {
  std::mt19937_64 rng(5150);
  std::uniform_int_distribution<int> dim(2, 8), lv(2, 8);
  int mismatches = 0;
  for (int n = 0; n < 500; ++n) {
    const Kernel k = oracle::random_kernel(rng, dim(rng), dim(rng), lv(rng));
    for (Offset off : kCanonicalOffsets) {
      const CountMatrix c = cooccurrence(k, off);
      const auto ref = oracle::glcm_counts(k, off.dy, off.dx, true);
      for (int i = 0; i < k.levels; ++i)
        for (int j = 0; j < k.levels; ++j) mismatches += c.at(i, j) != ref[i][j];
    }
  }
  return {mismatches == 0, fmt::format("500 kernels <= 8x8, 4 directions, {} mismatched cells", mismatches)};
}

Outcome gradient_check() {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(-1, 1);
  const double eps = 1e-5;
  const auto t0 = Clock::now();
  double worst = 0;
  int instances = 0, resampled = 0;
  while (instances < 50) {
    nn::TrainConfig tc;
    tc.seed = rng();
    nn::Network net = nn::init_network({3, 4, 1}, tc);
    for (auto& b : net.biases)
      for (int i = 0; i < b.size(); ++i) b(i) = 0.5 * u(rng);
    Eigen::VectorXd x(3);
    for (int i = 0; i < 3; ++i) x(i) = u(rng);
    const double target = static_cast<double>(rng() % 2);
    const nn::ForwardPass pass = nn::forward(net, x);
    if ((pass.pre[0].array().abs() < 1e-3).any()) {
      ++resampled;
      continue;
    }
    const nn::Gradients g = nn::backward(net, pass, target);
    auto check = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + eps;
      const long double up = oracle::loss(net, x, target);
      param = saved - eps;
      const long double down = oracle::loss(net, x, target);
      param = saved;
      const double fd = static_cast<double>((up - down) / (2 * eps));
      worst = std::max(worst, std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-8}));
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      for (int i = 0; i < net.weights[l].size(); ++i) check(net.weights[l].data()[i], g.weights[l].data()[i]);
      for (int i = 0; i < net.biases[l].size(); ++i) check(net.biases[l](i), g.biases[l](i));
    }
    ++instances;
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-5 && secs < 5,
          fmt::format("50 instances of [3,4,1] ({} resampled near kinks), max relative error {:.2e} (< 1e-5), "
                      "{:.2f} s (< 5 s)",
                      resampled, worst, secs)};
}

Outcome training_analog() {
  const pipeline::PipelineConfig cfg = pipeline::parse_config(R"({"seed": 7})");
  const auto t0 = Clock::now();
  const SegmentDataset ds =
      synthetic::corpus(cfg.synth.render, cfg.segmentation.window.window, cfg.synth.corpus_images, cfg.seed);
  const nn::Dataset examples = to_examples(ds, cfg.segmentation.input_dims);
  const auto split = nn::split_dataset(examples, cfg.train.split_ratio, cfg.train.seed);
  const auto r = nn::train(nn::init_network(cfg.layers, cfg.train), split.train, cfg.train, split.test);
  const double secs = seconds_since(t0);
  const auto& costs = r.report.cost_per_iteration;
  const double acc = r.report.test_accuracy.value_or(0);
  const bool pass = examples.size() >= 400 && acc >= 0.85 && secs < 60 && costs.size() == 2000 &&
                    costs.back() < costs.front();
  return {pass, fmt::format("{} windows ({} valid / {} invalid), split {}/{}, test accuracy {:.4f} (>= 0.85), "
                            "{} costs, cost {:.4f} -> {:.4f}, {:.1f} s (< 60 s)",
                            examples.size(), ds.count(SegmentLabel::Valid), ds.count(SegmentLabel::Invalid),
                            split.train.size(), split.test.size(), acc, costs.size(), costs.front(),
                            costs.back(), secs)};
}

Outcome denoise_analog() {
  const pipeline::PipelineConfig cfg = pipeline::parse_config(R"({"seed": 7})");
  int noise_total = 0, noise_hit = 0, glyph_total = 0, glyph_hit = 0;
  bool every_image = true;
  std::string per_image;
  for (std::uint64_t seed = cfg.seed; seed < cfg.seed + 5; ++seed) {
    const auto synth = render_synthetic(cfg.synth.render, seed);
    const auto dict = build_dictionary(
        synthetic::label_kernels(synth, cfg.denoise.kernel, cfg.synth.labeled_kernels, seed, cfg.haralick));
    const auto r = denoise(synth.image, dict, cfg.denoise);
    int n = 0, nh = 0, g = 0, gh = 0;
    for (const auto& a : r.mask) {
      if (synth.truth.noise_kernel_ids.count(a.kernel_id)) {
        ++n;
        nh += a.replaced;
      }
      const bool glyph = std::any_of(synth.truth.glyph_boxes.begin(), synth.truth.glyph_boxes.end(),
                                     [&](const Rect& b) { return b.intersects(a.rect); });
      if (glyph) {
        ++g;
        gh += a.replaced;
      }
    }
    every_image = every_image && n > 0 && nh >= 0.9 * n && gh <= 0.05 * g;
    per_image += fmt::format(" {}/{}|{}/{}", nh, n, gh, g);
    noise_total += n;
    noise_hit += nh;
    glyph_total += g;
    glyph_hit += gh;
  }
  return {every_image, fmt::format("5 images, 40 labeled kernels each: noise replaced {:.1f}% (>= 90%), "
                                   "glyph kernels replaced {:.1f}% (<= 5%); per image noise|glyph:{}",
                                   100.0 * noise_hit / noise_total, 100.0 * glyph_hit / glyph_total, per_image)};
}

Outcome reference_rows() {
  const auto d = build_dictionary({{"r1", 0.88917, KernelClass::Text},
                                   {"r2", 0.88876, KernelClass::Text},
                                   {"r3", 0.8885, KernelClass::Text},
                                   {"r4", 0.88832, KernelClass::MostlyText},
                                   {"r5", 0.88861, KernelClass::MostlyText},
                                   {"r6", 0.88845, KernelClass::MostlyText}});
  const auto& text = d.ranges.at(KernelClass::Text);
  const auto& mostly = d.ranges.at(KernelClass::MostlyText);
  const KernelClass c = classify_mcc(0.88861, d);
  const bool pass = text.contains(0.88917) && text.contains(0.8885) && mostly.contains(0.88832) &&
                    c == KernelClass::MostlyText;
  return {pass, fmt::format("Text [{}, {}], MostlyText [{}, {}], classify(0.88861) = {}", text.min, text.max,
                            mostly.min, mostly.max, to_string(c))};
}

std::map<std::string, std::string> tree_digest(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).generic_string()] = pipeline::sha256_hex(ss.str());
  }
  return out;
}

int run_chain(const std::string& cli, const fs::path& root) {
  fs::remove_all(root);
  fs::create_directories(root);
  { std::ofstream(root / "config.json") << R"({"seed": 7})" << '\n'; }
  const std::string c = fmt::format("\"{}\" --config \"{}\" ", cli, (root / "config.json").string());
  const fs::path r = root / "runs";
  const std::vector<std::string> steps = {
      fmt::format("synth -o \"{}\"", (r / "synth").string()),
      fmt::format("features \"{}\" -o \"{}\"", (r / "synth/image.png").string(), (r / "features").string()),
      fmt::format("build-dict \"{}\" -o \"{}\"", (r / "synth/kernel_labels.csv").string(), (r / "dict").string()),
      fmt::format("denoise \"{}\" \"{}\" -o \"{}\"", (r / "synth/image.png").string(),
                  (r / "dict/dictionary.json").string(), (r / "denoise").string()),
      fmt::format("windows \"{}\" -o \"{}\"", (r / "denoise/denoised.png").string(), (r / "windows").string()),
      fmt::format("train \"{}\" -o \"{}\"", (r / "synth/dataset").string(), (r / "train").string()),
      fmt::format("segment \"{}\" \"{}\" -o \"{}\"", (r / "denoise/denoised.png").string(),
                  (r / "train/model.json").string(), (r / "segment").string()),
      fmt::format("evaluate \"{}\" \"{}\" --split-file \"{}\" -o \"{}\"", (r / "train/model.json").string(),
                  (r / "synth/dataset").string(), (r / "train/split.csv").string(), (r / "evaluate").string()),
  };
  for (const auto& s : steps) {
    const int rc = std::system((c + s + " > /dev/null").c_str());
    if (rc != 0) return rc;
  }
  return 0;
}

Outcome determinism(const std::string& cli) {
  if (cli.empty() || !fs::exists(cli)) return {false, "CLI binary not found"};
  const fs::path base = fs::temp_directory_path() / "epigraph_acceptance_determinism";
  const auto t0 = Clock::now();
  if (int rc = run_chain(cli, base / "a"); rc != 0) return {false, fmt::format("first run failed ({})", rc)};
  if (int rc = run_chain(cli, base / "b"); rc != 0) return {false, fmt::format("second run failed ({})", rc)};
  const auto a = tree_digest(base / "a" / "runs"), b = tree_digest(base / "b" / "runs");
  std::vector<std::string> differing;
  for (const auto& [name, hash] : a) {
    auto it = b.find(name);
    if (it == b.end() || it->second != hash) differing.push_back(name);
  }
  for (const auto& [name, _] : b)
    if (!a.count(name)) differing.push_back(name);
  double accuracy = 0;
  {
    std::ifstream in(base / "a" / "runs" / "evaluate" / "evaluation.json");
    accuracy = nlohmann::json::parse(in).at("accuracy").get<double>();
  }
  const double secs = seconds_since(t0);
  fs::remove_all(base);
  std::string detail = fmt::format("{} artifacts compared across 8 commands, {} differ; evaluate accuracy {:.4f}; {:.1f} s",
                                   a.size(), differing.size(), accuracy, secs);
  if (!differing.empty()) detail += " (first: " + differing.front() + ")";
  return {differing.empty() && !a.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"haralick-oracle", haralick_oracle},
      {"mcc-spectrum", mcc_spectrum},
      {"glcm-brute-force", glcm_brute_force},
      {"gradient-check", gradient_check},
      {"training-analog", training_analog},
      {"denoise-analog", denoise_analog},
      {"reference-rows", reference_rows},
      {"determinism", [&] { return determinism(cli); }},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << fmt::format("{} {:<18} {}", o.pass ? "PASS" : "FAIL", name, o.detail) << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size()) << std::endl;
  return failed == 0 ? 0 : 1;
}
