#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "benchtop/errors.hpp"

namespace benchtop {

enum class TrainStage { dapt, sft, distill };

inline std::string to_string(TrainStage s) {
  switch (s) {
    case TrainStage::dapt: return "dapt";
    case TrainStage::sft: return "sft";
    case TrainStage::distill: return "distill";
  }
  return "dapt";
}

enum class LrShape { constant, linear_warmup_cosine };

inline std::string to_string(LrShape s) {
  return s == LrShape::constant ? "constant" : "linear_warmup_cosine";
}

struct OptimizerParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 0.0;
};

struct StagePlan {
  TrainStage stage = TrainStage::dapt;
  std::uint64_t seq_len = 0;
  std::uint64_t global_batch = 0;     // sequences per step
  std::uint64_t tokens_per_step = 0;  // = seq_len * global_batch
  std::uint64_t total_steps = 0;
  std::optional<std::uint64_t> nominal_steps;  // round figure quoted for the
                                               // run, when it differs from
                                               // the exact ceiling
  double peak_lr = 0.0;
  std::uint64_t warmup_steps = 0;
  LrShape schedule = LrShape::constant;
  OptimizerParams optimizer;
  std::string precision_label = "bfloat16";

  void validate() const {
    if (tokens_per_step != seq_len * global_batch) {
      throw Error("tokens_per_step must equal seq_len * global_batch");
    }
    if (warmup_steps > total_steps) throw Error("warmup longer than the run");
    if (!(optimizer.beta1 > 0 && optimizer.beta1 < optimizer.beta2 &&
          optimizer.beta2 < 1)) {
      throw Error("optimizer betas must satisfy 0 < beta1 < beta2 < 1");
    }
  }
};

// ---------------------------------------------------------------------------

struct BudgetSteps {
  std::uint64_t tokens_per_step = 0;
  std::uint64_t steps = 0;  // ceil(total_tokens / tokens_per_step)
};

inline BudgetSteps steps_for_budget(std::uint64_t total_tokens,
                                    std::uint64_t seq_len,
                                    std::uint64_t global_batch) {
  if (total_tokens < 1 || seq_len < 1 || global_batch < 1) {
    throw Error("budget inputs must be >= 1");
  }
  BudgetSteps out;
  out.tokens_per_step = seq_len * global_batch;
  out.steps = (total_tokens + out.tokens_per_step - 1) / out.tokens_per_step;
  return out;
}

// ---------------------------------------------------------------------------

struct LrSchedule {
  double peak_lr = 0.0;
  std::uint64_t warmup_steps = 0;
  std::uint64_t total_steps = 0;
  LrShape shape = LrShape::linear_warmup_cosine;
};

// Linear ramp to peak over [0, W], then cosine decay to exactly zero at T.
// Continuous at W; constant shape ignores W.
inline double lr_at(const LrSchedule& s, std::uint64_t step) {
  if (step > s.total_steps) {
    throw StepOutOfRange(static_cast<long long>(step),
                         static_cast<long long>(s.total_steps));
  }
  if (s.shape == LrShape::constant) return s.peak_lr;
  if (step <= s.warmup_steps) {
    if (s.warmup_steps == 0) return s.peak_lr;
    return s.peak_lr * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
  }
  const double progress = static_cast<double>(step - s.warmup_steps) /
                          static_cast<double>(s.total_steps - s.warmup_steps);
  return s.peak_lr * 0.5 * (1.0 + std::cos(3.141592653589793238462643 * progress));
}

inline LrSchedule schedule_for(const StagePlan& plan) {
  return LrSchedule{plan.peak_lr, plan.warmup_steps, plan.total_steps, plan.schedule};
}

// ---------------------------------------------------------------------------
// Published presets for the three-stage recipe. Values are the run's own
// hyperparameters; the dapt step count is the exact token-budget ceiling,
// with the rounder one-pass figure kept alongside it.
// ---------------------------------------------------------------------------

struct TrainPresets {
  StagePlan dapt;
  StagePlan sft;
  StagePlan distill;
};

constexpr std::uint64_t kDaptCorpusTokens = 35'000'000'000ULL;

inline TrainPresets paper_presets() {
  TrainPresets p;

  p.dapt.stage = TrainStage::dapt;
  p.dapt.seq_len = 8192;
  p.dapt.global_batch = 64;
  p.dapt.tokens_per_step = p.dapt.seq_len * p.dapt.global_batch;  // 524288
  BudgetSteps budget = steps_for_budget(kDaptCorpusTokens, p.dapt.seq_len, p.dapt.global_batch);
  p.dapt.total_steps = budget.steps;  // 66758
  p.dapt.nominal_steps = 66000;       // the quoted "one full pass" figure
  p.dapt.peak_lr = 1e-5;
  p.dapt.schedule = LrShape::constant;
  p.dapt.optimizer = {0.9, 0.999, 1e-4};

  p.sft = p.dapt;
  p.sft.stage = TrainStage::sft;
  p.sft.total_steps = 1400;
  p.sft.nominal_steps.reset();
  p.sft.peak_lr = 1e-6;  // same settings as dapt, only the rate drops

  p.distill.stage = TrainStage::distill;
  p.distill.seq_len = 16384;  // "16k" read as a power of two
  p.distill.global_batch = 2;
  p.distill.tokens_per_step = p.distill.seq_len * p.distill.global_batch;
  p.distill.total_steps = 2500;  // 5 epochs x 1000 samples / batch 2
  p.distill.peak_lr = 1e-5;
  p.distill.warmup_steps = 128;
  p.distill.schedule = LrShape::linear_warmup_cosine;
  p.distill.optimizer = {0.9, 0.95, 1e-4};

  p.dapt.validate();
  p.sft.validate();
  p.distill.validate();
  return p;
}

// ---------------------------------------------------------------------------
// plan.json emission; insertion-ordered keys so golden files stay stable.
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json plan_to_json(const StagePlan& plan) {
  nlohmann::ordered_json j;
  j["stage"] = to_string(plan.stage);
  j["seq_len"] = plan.seq_len;
  j["global_batch"] = plan.global_batch;
  j["tokens_per_step"] = plan.tokens_per_step;
  j["total_steps"] = plan.total_steps;
  if (plan.nominal_steps) j["nominal_steps"] = *plan.nominal_steps;
  j["peak_lr"] = plan.peak_lr;
  j["warmup_steps"] = plan.warmup_steps;
  j["schedule"] = to_string(plan.schedule);
  j["optimizer"] = {{"beta1", plan.optimizer.beta1},
                    {"beta2", plan.optimizer.beta2},
                    {"weight_decay", plan.optimizer.weight_decay}};
  j["precision"] = plan.precision_label;
  return j;
}

inline void write_plan_json(const StagePlan& plan, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << plan_to_json(plan).dump(2) << '\n';
}

}  // namespace benchtop
