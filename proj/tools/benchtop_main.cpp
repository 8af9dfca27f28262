// Command-line front end: every pipeline stage as a subcommand, chained by
// `all`. Artifacts land under the configured work directory, each with a
// digest-pinned manifest so reruns can be diffed byte for byte.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "benchtop/config.hpp"
#include "benchtop/corpus.hpp"
#include "benchtop/dedup.hpp"
#include "benchtop/manifest.hpp"
#include "benchtop/pack.hpp"
#include "benchtop/quality.hpp"
#include "benchtop/rag.hpp"
#include "benchtop/screening.hpp"
#include "benchtop/sft_gen.hpp"
#include "benchtop/tokenizer.hpp"
#include "benchtop/train_plan.hpp"

namespace fs = std::filesystem;
using namespace benchtop;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

struct StageContext {
  PipelineConfig cfg;

  RunManifest manifest(const std::string& stage,
                       const nlohmann::json& params) const {
    RunManifest m;
    m.stage = stage;
    m.base = cfg.workdir;
    m.params_hash = params_hash_of(params);
    m.seed = cfg.seed;
    m.workers = cfg.workers;
    return m;
  }

  void finish(RunManifest& m) const {
    write_manifest(m, cfg.artifact("manifest_" + m.stage + ".json"));
  }
};

void run_ingest(const StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto m = ctx.manifest("ingest", {{"format", cfg.corpus_format}});
  m.add_input(cfg.corpus_in);

  Corpus corpus = ingest(cfg.corpus_in, cfg.corpus_format == "jsonl"
                                            ? IngestFormat::jsonl
                                            : IngestFormat::plain_dir);
  corpus = normalize(corpus);
  const fs::path out = cfg.artifact("corpus_ingested.jsonl");
  write_corpus_jsonl(corpus, out);
  m.add_output(out);
  ctx.finish(m);

  std::cout << "ingest: " << corpus.size() << " documents\n";
  for (const auto& [source, count] : corpus.stats()) {
    std::cout << "  " << to_string(source) << ": " << count << '\n';
  }
}

void run_dedup(const StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto m = ctx.manifest("dedup", {{"window", cfg.dedup.window},
                                  {"signature_width", cfg.dedup.signature_width},
                                  {"bands", cfg.dedup.bands},
                                  {"rows", cfg.dedup.rows},
                                  {"threshold", cfg.dedup.threshold},
                                  {"seed", cfg.dedup.seed}});
  const fs::path in = cfg.artifact("corpus_ingested.jsonl");
  m.add_input(in);

  Corpus corpus = ingest_jsonl(in);
  auto [survivors, clusters] = dedup_corpus(corpus, cfg.dedup);
  const fs::path out = cfg.artifact("corpus_dedup.jsonl");
  const fs::path clusters_out = cfg.artifact("clusters.jsonl");
  write_corpus_jsonl(survivors, out);
  write_clusters_jsonl(clusters, clusters_out);
  m.add_output(out);
  m.add_output(clusters_out);
  ctx.finish(m);

  std::cout << "dedup: " << corpus.size() << " -> " << survivors.size()
            << " documents, " << clusters.clusters.size() << " clusters\n";
}

void run_filter(const StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto m = ctx.manifest("filter", {{"min_words", cfg.filter.min_words},
                                   {"max_words", cfg.filter.max_words}});
  const fs::path in = cfg.artifact("corpus_dedup.jsonl");
  m.add_input(in);

  Corpus corpus = ingest_jsonl(in);
  auto [kept, verdicts] = filter_corpus(corpus, cfg.filter);
  const fs::path out = cfg.artifact("corpus_filtered.jsonl");
  const fs::path verdicts_out = cfg.artifact("verdicts.jsonl");
  write_corpus_jsonl(kept, out);
  write_verdicts_jsonl(verdicts, verdicts_out);
  m.add_output(out);
  m.add_output(verdicts_out);
  ctx.finish(m);

  std::cout << "filter: kept " << kept.size() << " of " << corpus.size()
            << " documents\n";
}

void run_pack(const StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto m = ctx.manifest("pack", {{"seq_len", cfg.seq_len},
                                 {"tokenizer", cfg.tokenizer},
                                 {"split_long", cfg.split_long_docs}});
  const fs::path in = cfg.artifact("corpus_filtered.jsonl");
  m.add_input(in);

  Corpus corpus = ingest_jsonl(in);
  auto tok = make_tokenizer(cfg.tokenizer);
  PackedShard shard = pack(corpus, *tok, cfg.seq_len, cfg.split_long_docs);
  const fs::path out = cfg.artifact("train.shard");
  write_shard(shard, out);
  m.add_output(out);
  ctx.finish(m);

  std::size_t total = 0;
  auto counter = make_tokenizer(cfg.tokenizer);
  total = count_tokens(corpus, *counter).total;
  std::cout << "pack: " << total << " tokens into " << shard.rows.size()
            << " rows of " << shard.seq_len << '\n';
}

void run_plan(const StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto m = ctx.manifest("plan", {{"preset", "published"}});

  TrainPresets presets = paper_presets();
  for (const StagePlan* plan : {&presets.dapt, &presets.sft, &presets.distill}) {
    const fs::path out = cfg.artifact("plan_" + to_string(plan->stage) + ".json");
    write_plan_json(*plan, out);
    m.add_output(out);
    std::cout << "plan " << to_string(plan->stage) << ": " << plan->total_steps
              << " steps x " << plan->tokens_per_step << " tokens/step";
    if (plan->nominal_steps) {
      std::cout << " (exact ceiling " << plan->total_steps
                << " vs nominal one-pass figure " << *plan->nominal_steps << ")";
    }
    std::cout << '\n';
  }
  ctx.finish(m);
}

void run_sftgen(const StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto m = ctx.manifest("sftgen", {{"train_fraction", cfg.train_fraction},
                                   {"min_words", cfg.gen_min_words},
                                   {"refine", cfg.refine_enabled}});
  const fs::path in = cfg.artifact("corpus_filtered.jsonl");
  m.add_input(in);
  if (!cfg.chat_samples.empty()) m.add_input(cfg.chat_samples);

  Corpus corpus = ingest_jsonl(in);
  auto generator = make_backend(cfg, "generator");
  GenerationRun run =
      generate_for_corpus(corpus, *generator, cfg.gen_min_words, cfg.workers);
  const fs::path samples_out = cfg.artifact("samples.jsonl");
  write_samples_jsonl(run.samples, samples_out);
  m.add_output(samples_out);

  DatasetSplit ds = split(run.samples, cfg.train_fraction, cfg.seed);
  const fs::path train_out = cfg.artifact("train.jsonl");
  const fs::path test_out = cfg.artifact("test.jsonl");
  write_samples_jsonl(ds.train, train_out);
  write_samples_jsonl(ds.test, test_out);
  m.add_output(train_out);
  m.add_output(test_out);

  std::vector<InstructionSample> chat;
  if (!cfg.chat_samples.empty()) chat = read_samples_jsonl(cfg.chat_samples);
  std::vector<InstructionSample> mixed = mix_chat(ds.train, chat, cfg.seed);
  const fs::path mix_out = cfg.artifact("sft_mix.jsonl");
  write_samples_jsonl(mixed, mix_out);
  m.add_output(mix_out);

  std::cout << "sftgen: " << corpus.size() << " docs -> " << run.samples.size()
            << " samples (skipped " << run.skipped_docs.size() << " short docs), split "
            << ds.train.size() << "/" << ds.test.size() << ", mixed "
            << mixed.size() << '\n';

  if (cfg.refine_enabled) {
    auto grader_small = make_backend(cfg, "grader_small");
    auto grader_large = make_backend(cfg, "grader_large");
    auto verifier = make_backend(cfg, "verifier");

    ValidationSplit valid = validate_samples(ds.train);
    DifficultyResult difficulty = difficulty_filter(
        valid.kept, *grader_small, *grader_large, *verifier, cfg.workers);

    // topic labels for the diversity pass come from the generator backend
    std::vector<InstructionSample> labeled = difficulty.retained;
    parallel_for(labeled.size(), cfg.workers, [&](std::size_t i) {
      ChatRequest req;
      req.messages = prompts::topic_messages(labeled[i].prompt);
      labeled[i].topic_label = trim(generator->chat(req).content);
    });

    std::size_t target = cfg.refine_target == 0
                             ? labeled.size()
                             : std::min(cfg.refine_target, labeled.size());
    std::vector<InstructionSample> refined =
        diversity_sample(labeled, target, cfg.seed);

    const fs::path refined_out = cfg.artifact("refined.jsonl");
    const fs::path audits_out = cfg.artifact("audits.jsonl");
    write_samples_jsonl(refined, refined_out);
    write_audits_jsonl(difficulty.audits, audits_out);
    m.add_output(refined_out);
    m.add_output(audits_out);
    std::cout << "refine: " << valid.kept.size() << " valid -> "
              << difficulty.retained.size() << " hard -> " << refined.size()
              << " diverse\n";
  }
  ctx.finish(m);
}

void run_index(const StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto m = ctx.manifest("index", {{"chunk_size", cfg.chunk_size},
                                  {"overlap", cfg.chunk_overlap},
                                  {"k1", cfg.bm25_k1},
                                  {"b", cfg.bm25_b}});
  const fs::path in = cfg.reference_texts.empty()
                          ? cfg.artifact("corpus_filtered.jsonl")
                          : cfg.reference_texts;
  m.add_input(in);

  Corpus corpus = ingest_jsonl(in);
  auto chunks = chunk_corpus(corpus, cfg.chunk_size, cfg.chunk_overlap);
  LexicalIndex index(std::move(chunks), cfg.bm25_k1, cfg.bm25_b);
  const fs::path out = cfg.artifact("index.bin");
  save_index(index, out);
  m.add_output(out);
  ctx.finish(m);

  std::cout << "index: " << index.chunk_count() << " chunks from "
            << corpus.size() << " documents\n";
}

void run_screen(const StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.molecules.empty()) {
    throw ConfigInvalid("paths.molecules", "required for screening");
  }
  auto m = ctx.manifest("screen", {{"max_rounds", cfg.screening.max_rounds},
                                   {"top_k", cfg.screening.top_k}});
  m.add_input(cfg.molecules);
  const fs::path index_path = cfg.artifact("index.bin");
  m.add_input(index_path);

  std::vector<Molecule> molecules = read_molecules_jsonl(cfg.molecules);
  LexicalIndex index = load_index(index_path);
  auto generator = make_backend(cfg, "generator");
  auto reflector = make_backend(cfg, "reflector");

  std::vector<GradedMolecule> graded = screen_pool(
      molecules, *generator, *reflector, index, cfg.screening, cfg.workers);

  const fs::path graded_out = cfg.artifact("graded.jsonl");
  const fs::path transcripts_out = cfg.artifact("transcripts.jsonl");
  write_graded_jsonl(graded, graded_out);
  write_transcripts_jsonl(graded, transcripts_out);
  m.add_output(graded_out);
  m.add_output(transcripts_out);
  ctx.finish(m);

  std::cout << "screen: graded " << graded.size() << " molecules\n";
}

void run_report(const StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.molecules.empty()) {
    throw ConfigInvalid("paths.molecules", "required for reporting");
  }
  auto m = ctx.manifest("report", {});
  const fs::path graded_in = cfg.artifact("graded.jsonl");
  m.add_input(graded_in);
  m.add_input(cfg.molecules);

  std::vector<GradedMolecule> graded = read_graded_jsonl(graded_in);
  std::vector<std::string> good_ids;
  for (const auto& mol : read_molecules_jsonl(cfg.molecules)) {
    if (mol.is_known_good.value_or(false)) good_ids.push_back(mol.id);
  }
  RankingReport report = build_report(graded, good_ids);
  const fs::path out = cfg.artifact("report.json");
  write_report_json(report, out);
  m.add_output(out);
  ctx.finish(m);

  std::cout << "report: mean grade (good) " << report.mean_grade_good
            << ", mean rank (good) " << report.mean_rank_good << '\n';
  for (const auto& [k, v] : report.hits) {
    std::cout << "  hits@" << k << " = " << v << '\n';
  }
}

using StageFn = void (*)(const StageContext&);

const std::vector<std::pair<std::string, StageFn>> kStages = {
    {"ingest", run_ingest}, {"dedup", run_dedup},   {"filter", run_filter},
    {"pack", run_pack},     {"plan", run_plan},     {"sftgen", run_sftgen},
    {"index", run_index},   {"screen", run_screen}, {"report", run_report},
};

int run_stage(const std::string& name, const StageContext& ctx) {
  try {
    std::filesystem::create_directories(ctx.cfg.workdir);
    for (const auto& [stage_name, fn] : kStages) {
      if (stage_name == name) {
        fn(ctx);
        return kExitOk;
      }
    }
    if (name == "all") {
      for (const auto& [stage_name, fn] : kStages) {
        try {
          fn(ctx);
        } catch (const ConfigInvalid&) {
          throw;
        } catch (const Error& e) {
          throw StageFailed(stage_name, e.what());
        }
      }
      return kExitOk;
    }
    throw Error("unknown stage: " + name);
  } catch (const ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "stage failed: " << e.what() << '\n';
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "stage failed: " << e.what() << '\n';
    return kExitStage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corpus curation, training-plan and screening-agent pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::int64_t seed_override = -1;
  std::int64_t workers_override = -1;

  std::vector<std::string> names;
  for (const auto& [name, fn] : kStages) names.push_back(name);
  names.push_back("all");

  std::string chosen;
  for (const auto& name : names) {
    auto* sub = app.add_subcommand(
        name, name == "all" ? "run every stage in order, fail fast"
                            : "run the " + name + " stage");
    sub->add_option("--config", config_path, "pipeline config JSON")->required();
    sub->add_option("--seed", seed_override, "override the configured seed");
    sub->add_option("--workers", workers_override, "override worker count");
    sub->callback([&chosen, name] { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);

  StageContext ctx;
  try {
    ctx.cfg = load_config(config_path);
    if (seed_override >= 0) {
      ctx.cfg.seed = static_cast<std::uint64_t>(seed_override);
      ctx.cfg.dedup.seed = ctx.cfg.seed;
    }
    if (workers_override >= 1) {
      ctx.cfg.workers = static_cast<std::size_t>(workers_override);
      ctx.cfg.dedup.workers = ctx.cfg.workers;
    }
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  return run_stage(chosen, ctx);
}
