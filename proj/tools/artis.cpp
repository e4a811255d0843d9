// Command-line front end wiring ingestion -> extraction -> matching ->
// evaluation. Stages communicate only through files (ARTF/ARTV/CSV) so each
// stage is independently cacheable and external feature extractors can plug
// in at the ARTV boundary.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "artis/artis.hpp"

namespace fs = std::filesystem;

namespace {

void attach_config_flags(CLI::App* sub, artis::RunConfig& cfg, std::string& config_path) {
  for (const auto& field : artis::detail::config_fields()) {
    void* p = field.ptr(cfg);
    const std::string name = std::string("--") + field.key;
    switch (field.type) {
      case artis::detail::ConfigField::kInt:
        sub->add_option(name, *static_cast<int*>(p));
        break;
      case artis::detail::ConfigField::kDouble:
        sub->add_option(name, *static_cast<double*>(p));
        break;
      case artis::detail::ConfigField::kString:
        sub->add_option(name, *static_cast<std::string*>(p));
        break;
    }
  }
  sub->add_option("--config", config_path, "key=value config file");
}

/// Effective config: file values (over defaults) overridden by any flag that
/// was given on the command line.
artis::RunConfig resolve_config(CLI::App* sub, const artis::RunConfig& cli_cfg,
                                const std::string& config_path) {
  artis::RunConfig eff =
      config_path.empty() ? artis::RunConfig{} : artis::load_config(config_path);
  artis::RunConfig& cli_mutable = const_cast<artis::RunConfig&>(cli_cfg);
  for (const auto& field : artis::detail::config_fields()) {
    const auto* opt = sub->get_option(std::string("--") + field.key);
    if (opt->count() == 0) continue;
    void* src = field.ptr(cli_mutable);
    void* dst = field.ptr(eff);
    switch (field.type) {
      case artis::detail::ConfigField::kInt:
        *static_cast<int*>(dst) = *static_cast<int*>(src);
        break;
      case artis::detail::ConfigField::kDouble:
        *static_cast<double*>(dst) = *static_cast<double*>(src);
        break;
      case artis::detail::ConfigField::kString:
        *static_cast<std::string*>(dst) = *static_cast<std::string*>(src);
        break;
    }
  }
  return eff;
}

bool has_extension(const std::string& path, const char* ext) {
  std::string e = fs::path(path).extension().string();
  for (auto& c : e) c = static_cast<char>(std::tolower(c));
  return e == ext;
}

artis::FeatureVectorSequence load_fhdof_input(const std::string& path,
                                              const artis::RunConfig& cfg) {
  if (has_extension(path, ".artv")) return artis::load_artv(path);
  auto seq = artis::load_frames_auto(path, cfg.stride);
  return artis::to_feature_vectors(
      artis::build_descriptor_sequence(seq, artis::fhdof_params(cfg)));
}

artis::FeatureVectorSequence load_patchnorm_input(const std::string& path,
                                                  const artis::RunConfig& cfg) {
  if (has_extension(path, ".artv")) return artis::load_artv(path);
  auto seq = artis::load_frames_auto(path, cfg.stride);
  return artis::to_feature_vectors(artis::patchnorm_descriptor(
      seq, cfg.pn_grid_w, cfg.pn_grid_h, cfg.pn_patch, cfg.threads));
}

struct MatchOutputs {
  std::vector<artis::MatchSegment> segments;
  artis::SimilarityMatrix raw;
  artis::SimilarityMatrix processed;
};

MatchOutputs run_distance_match(const artis::FeatureVectorSequence& temp,
                                const artis::FeatureVectorSequence& obs,
                                const artis::RunConfig& cfg) {
  MatchOutputs out;
  out.raw = artis::ssd_matrix(temp, obs, cfg.threads);
  out.processed = artis::enhance(out.raw, cfg.enhance_window);
  out.segments = artis::line_search(out.processed, artis::line_search_params(cfg));
  return out;
}

MatchOutputs run_tpdf_match(const artis::FeatureVectorSequence& temp,
                            const artis::FeatureVectorSequence& obs,
                            const artis::RunConfig& cfg) {
  const artis::PoolMethod method = artis::parse_pool_method(cfg.tpdf_method);
  const auto svm = artis::ranksvm_params(cfg);
  const auto pa = artis::pool_sequence(temp, cfg.tpdf_window, method, svm, cfg.threads);
  const auto pb = artis::pool_sequence(obs, cfg.tpdf_window, method, svm, cfg.threads);
  MatchOutputs out;
  out.raw = artis::cosine_similarity_matrix(pa, pb, cfg.threads);
  const artis::CandidateSet cands = artis::adaptive_threshold(out.raw);
  out.processed = artis::apply_threshold(out.raw, cands.threshold);
  out.segments = artis::extract_chains(cands, artis::chain_params(cfg));
  return out;
}

void write_match_outputs(const MatchOutputs& out, const std::string& out_dir,
                         const artis::RunConfig& cfg) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  artis::save_matches_csv(out.segments, (dir / "matches.csv").string());
  artis::save_matrix_artv(out.raw.scores, (dir / "matrix_raw.artv").string());
  artis::save_matrix_artv(out.processed.scores, (dir / "matrix_enhanced.artv").string());
  artis::write_pgm_scaled(out.raw.scores, (dir / "matrix_raw.pgm").string());
  artis::write_pgm_scaled(out.processed.scores, (dir / "matrix_enhanced.pgm").string());
  artis::save_config(cfg, (dir / "config.txt").string());
}

artis::SynthScript bench_script(int width, int height, int frames) {
  artis::SynthScript script;
  script.canvas_w = width;
  script.canvas_h = height;
  script.seed = 9;
  const int half = frames / 2;
  artis::SynthAction a;
  a.label = "sweep";
  a.duration = half;
  a.motif = artis::Motif::translate_blob;
  a.size = std::min(width, height) / 5.0;
  a.speed = 2;
  a.start_x = a.size;
  a.start_y = height / 2.0;
  a.dir_x = 1;
  a.dir_y = 0.2;
  artis::SynthAction b = a;
  b.label = "return";
  b.duration = frames - half;
  b.start_x = width / 2.0;
  b.start_y = height / 3.0;
  b.dir_x = -0.5;
  b.dir_y = 1;
  b.speed = 1.5;
  script.actions = {a, b};
  return script;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"artis: one-shot alignment of task videos against a reference recording"};
  app.require_subcommand(1);

  artis::RunConfig cfg;
  std::string cfg_path_exf, cfg_path_exp, cfg_path_match, cfg_path_mtp, cfg_path_eval,
      cfg_path_bench;

  // synth ------------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "render a scripted synthetic sequence");
  std::string synth_script_path, synth_out, synth_labels, synth_permute;
  double synth_warp = 1.0;
  synth->add_option("--script", synth_script_path, "script file")->required();
  synth->add_option("--out", synth_out, "output ARTF path")->required();
  synth->add_option("--labels", synth_labels, "output labels CSV path");
  synth->add_option("--warp", synth_warp, "playback speed factor");
  synth->add_option("--permute", synth_permute, "comma-separated action order");
  synth->callback([&]() {
    artis::SynthScript script = artis::load_script(synth_script_path);
    if (!synth_permute.empty()) {
      std::vector<int> order;
      for (const auto& tok : artis::split(synth_permute, ','))
        order.push_back(std::stoi(artis::trim(tok)));
      script = artis::permute(script, order);
    }
    if (synth_warp != 1.0) script = artis::time_warp(script, synth_warp);
    auto [seq, labels] = artis::render(script);
    artis::save_artf(seq, synth_out);
    if (!synth_labels.empty()) artis::save_labels_csv(labels, synth_labels);
    artis::save_script(script, synth_out + ".script");
    std::cout << "synth: frames=" << seq.size() << " actions=" << script.actions.size()
              << " out=" << synth_out << "\n";
  });

  // extract-fhdof ------------------------------------------------------------
  auto* exf = app.add_subcommand("extract-fhdof",
                                 "flow-weighted keypoint-density descriptors -> ARTV");
  std::string exf_input, exf_out;
  exf->add_option("--input", exf_input, "ARTF file or image directory")->required();
  exf->add_option("--out", exf_out, "output ARTV path")->required();
  attach_config_flags(exf, cfg, cfg_path_exf);
  exf->callback([&]() {
    const artis::RunConfig eff = resolve_config(exf, cfg, cfg_path_exf);
    auto seq = artis::load_frames_auto(exf_input, eff.stride);
    auto desc = artis::build_descriptor_sequence(seq, artis::fhdof_params(eff));
    artis::save_artv(artis::to_feature_vectors(desc), exf_out);
    artis::save_config(eff, exf_out + ".config");
    std::cout << "extract-fhdof: descriptors=" << desc.size() << " out=" << exf_out
              << "\n";
  });

  // extract-patchnorm --------------------------------------------------------
  auto* exp = app.add_subcommand("extract-patchnorm",
                                 "patch-normalized thumbnail descriptors -> ARTV");
  std::string exp_input, exp_out;
  exp->add_option("--input", exp_input, "ARTF file or image directory")->required();
  exp->add_option("--out", exp_out, "output ARTV path")->required();
  attach_config_flags(exp, cfg, cfg_path_exp);
  exp->callback([&]() {
    const artis::RunConfig eff = resolve_config(exp, cfg, cfg_path_exp);
    auto seq = artis::load_frames_auto(exp_input, eff.stride);
    auto desc = artis::patchnorm_descriptor(seq, eff.pn_grid_w, eff.pn_grid_h,
                                            eff.pn_patch, eff.threads);
    artis::save_artv(artis::to_feature_vectors(desc), exp_out);
    artis::save_config(eff, exp_out + ".config");
    std::cout << "extract-patchnorm: descriptors=" << desc.size() << " out=" << exp_out
              << "\n";
  });

  // match ---------------------------------------------------------------------
  auto* match = app.add_subcommand("match", "align an observation against a template");
  std::string match_method = "fhdof";
  std::string match_template, match_observation, match_out_dir = "match_out";
  match->add_option("--method", match_method, "fhdof | patchnorm-baseline | tpdf");
  match->add_option("--template", match_template, "template descriptors/features/frames")
      ->required();
  match->add_option("--observation", match_observation,
                    "observation descriptors/features/frames")
      ->required();
  match->add_option("--out-dir", match_out_dir, "output directory");
  attach_config_flags(match, cfg, cfg_path_match);
  match->callback([&]() {
    const artis::RunConfig eff = resolve_config(match, cfg, cfg_path_match);
    MatchOutputs out;
    if (match_method == "fhdof") {
      out = run_distance_match(load_fhdof_input(match_template, eff),
                               load_fhdof_input(match_observation, eff), eff);
    } else if (match_method == "patchnorm-baseline") {
      out = run_distance_match(load_patchnorm_input(match_template, eff),
                               load_patchnorm_input(match_observation, eff), eff);
    } else if (match_method == "tpdf") {
      // frames fall back to the built-in patch-normalized frame feature
      out = run_tpdf_match(load_patchnorm_input(match_template, eff),
                           load_patchnorm_input(match_observation, eff), eff);
    } else {
      throw artis::UsageError("unknown match method: " + match_method);
    }
    write_match_outputs(out, match_out_dir, eff);
    std::size_t pairs = 0;
    for (const auto& seg : out.segments) pairs += seg.pairs.size();
    std::cout << "match: method=" << match_method << " segments=" << out.segments.size()
              << " pairs=" << pairs << " out=" << match_out_dir << "\n";
  });

  // match-tpdf ----------------------------------------------------------------
  auto* mtp = app.add_subcommand("match-tpdf",
                                 "rank-pooled feature matching over ARTV inputs");
  std::string mtp_a, mtp_b, mtp_out_dir = "match_out", mtp_method = "approx";
  int mtp_window = 20;
  mtp->add_option("--features-a", mtp_a, "template features (ARTV)")->required();
  mtp->add_option("--features-b", mtp_b, "observation features (ARTV)")->required();
  mtp->add_option("--window", mtp_window, "pooling window (frames)");
  mtp->add_option("--method", mtp_method, "approx | ranksvm");
  mtp->add_option("--out-dir", mtp_out_dir, "output directory");
  attach_config_flags(mtp, cfg, cfg_path_mtp);
  mtp->callback([&]() {
    artis::RunConfig eff = resolve_config(mtp, cfg, cfg_path_mtp);
    eff.tpdf_window = mtp_window;
    eff.tpdf_method = mtp_method;
    auto out = run_tpdf_match(artis::load_artv(mtp_a), artis::load_artv(mtp_b), eff);
    write_match_outputs(out, mtp_out_dir, eff);
    std::size_t pairs = 0;
    for (const auto& seg : out.segments) pairs += seg.pairs.size();
    std::cout << "match-tpdf: segments=" << out.segments.size() << " pairs=" << pairs
              << " out=" << mtp_out_dir << "\n";
  });

  // eval ------------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "coverage-based precision/recall sweep");
  std::string eval_matches, eval_tlabels, eval_olabels, eval_out = "report.csv";
  std::string eval_coverage_out;
  eval->add_option("--matches", eval_matches, "matches CSV")->required();
  eval->add_option("--template-labels", eval_tlabels, "template labels CSV")->required();
  eval->add_option("--observation-labels", eval_olabels, "observation labels CSV")
      ->required();
  eval->add_option("--out", eval_out, "report CSV path");
  eval->add_option("--coverage-out", eval_coverage_out, "per-area coverage CSV path");
  attach_config_flags(eval, cfg, cfg_path_eval);
  eval->callback([&]() {
    const artis::RunConfig eff = resolve_config(eval, cfg, cfg_path_eval);
    const auto matches = artis::load_matches_csv(eval_matches);
    const auto temp_labels = artis::load_labels(eval_tlabels, "template");
    const auto obs_labels = artis::load_labels(eval_olabels, "observation");
    const auto areas = artis::build_areas(temp_labels, obs_labels);
    const auto report = artis::score(matches, areas, artis::coverage_thresholds(eff));
    artis::save_report_csv(report, eval_out);
    if (!eval_coverage_out.empty())
      artis::save_coverage_csv(matches, areas, eval_coverage_out);
    artis::save_config(eff, eval_out + ".config");
    const auto& best = report.best();
    std::printf(
        "eval: classes=%d within=%d between=%d best_f1=%.4f precision=%.4f "
        "recall=%.4f at_threshold=%.3f out=%s\n",
        report.class_count, report.within_count, report.between_count, best.f1,
        best.precision, best.recall, best.threshold, eval_out.c_str());
  });

  // bench -------------------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "throughput of the extract+match pipeline");
  int bench_w = 320, bench_h = 180, bench_frames = 45;
  bench->add_option("--width", bench_w, "frame width");
  bench->add_option("--height", bench_h, "frame height");
  bench->add_option("--frames", bench_frames, "frame count");
  attach_config_flags(bench, cfg, cfg_path_bench);
  bench->callback([&]() {
    const artis::RunConfig eff = resolve_config(bench, cfg, cfg_path_bench);
    auto [seq, labels] = artis::render(bench_script(bench_w, bench_h, bench_frames));
    const auto t0 = std::chrono::steady_clock::now();
    auto desc = artis::build_descriptor_sequence(seq, artis::fhdof_params(eff));
    auto vecs = artis::to_feature_vectors(desc);
    auto raw = artis::ssd_matrix(vecs, vecs, eff.threads);
    auto enh = artis::enhance(raw, eff.enhance_window);
    auto segments = artis::line_search(enh, artis::line_search_params(eff));
    const auto t1 = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(t1 - t0).count();
    const double fps = static_cast<double>(seq.size()) / seconds;
    std::size_t pairs = 0;
    for (const auto& seg : segments) pairs += seg.pairs.size();
    std::printf("bench: frames=%zu width=%d height=%d threads=%d seconds=%.3f fps=%.2f "
                "matched_pairs=%zu\n",
                seq.size(), bench_w, bench_h, artis::resolve_threads(eff.threads),
                seconds, fps, pairs);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const artis::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const artis::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const artis::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
