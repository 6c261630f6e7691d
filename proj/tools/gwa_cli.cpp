// Copyright 2026 The gwa Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// gwa -- group window attention scheduling toolbox.
//
// Subcommands: mask, windows, group, verify, simulate. All randomness flows
// from --seed, so identical invocations emit byte-identical output. JSON goes
// to stdout (schemas under schemas/); curves go to CSV files.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "gwa/gwa.hpp"

using json = nlohmann::json;

namespace {

// Shortest round-trip decimal form, for CSV cells.
std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing: " +
                             std::strerror(errno));
  }
  return out;
}

void emit(const json& doc, const std::string& path) {
  if (path.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::ofstream out = open_output(path);
    out << doc.dump(2) << "\n";
  }
}

json help_json(const CLI::App& app) {
  json doc;
  doc["name"] = app.get_name();
  doc["description"] = app.get_description();
  doc["options"] = json::array();
  for (const CLI::Option* opt : app.get_options()) {
    doc["options"].push_back({{"name", opt->get_name()},
                              {"description", opt->get_description()},
                              {"required", opt->get_required()},
                              {"default", opt->get_default_str()}});
  }
  doc["subcommands"] = json::array();
  for (const CLI::App* sub :
       app.get_subcommands([](const CLI::App*) { return true; })) {
    doc["subcommands"].push_back(help_json(*sub));
  }
  return doc;
}

// ---------------------------------------------------------------------------
// mask
// ---------------------------------------------------------------------------

struct MaskOpts {
  std::uint64_t seed = 0;
  int units_h = 7;
  int units_w = 7;
  double ratio = 0.75;
  int unit_span = 1;
  std::string format = "json";
};

int run_mask(const MaskOpts& opt) {
  const gwa::Mask mask = gwa::gen_batch_mask(opt.seed, opt.units_h, opt.units_w, opt.ratio);

  if (opt.format == "ascii") {
    std::cout << "# '.' visible, '#' hidden (" << mask.units_h << "x" << mask.units_w
              << ", ratio " << opt.ratio << ", seed " << opt.seed << ")\n";
    for (int r = 0; r < mask.units_h; ++r) {
      for (int c = 0; c < mask.units_w; ++c) std::cout << (mask.at(r, c) ? '.' : '#');
      std::cout << "\n";
    }
    return 0;
  }

  json doc;
  doc["command"] = "mask";
  doc["version"] = GWA_VERSION_STRING;
  doc["config"] = {{"seed", opt.seed},       {"units_h", opt.units_h},
                   {"units_w", opt.units_w}, {"ratio", opt.ratio},
                   {"unit_span", opt.unit_span}};
  doc["units_h"] = mask.units_h;
  doc["units_w"] = mask.units_w;
  doc["hidden_units"] = mask.hidden_count();
  doc["visible_units"] = mask.visible_count();
  json grid = json::array();
  for (std::uint8_t v : mask.visible) grid.push_back(v != 0);
  doc["visible"] = std::move(grid);
  if (opt.unit_span > 1) {
    const gwa::TokenVisibility vis = gwa::expand_to_tokens(mask, opt.unit_span);
    doc["tokens"] = {{"tokens_h", vis.tokens_h},
                     {"tokens_w", vis.tokens_w},
                     {"visible_tokens", vis.visible_count()}};
  }
  emit(doc, "");
  return 0;
}

// ---------------------------------------------------------------------------
// windows
// ---------------------------------------------------------------------------

struct WindowOpts {
  std::uint64_t seed = 0;
  int tokens_h = 56;
  int tokens_w = 56;
  int window = 7;
  std::vector<int> shift = {0, 0};
  int unit_span = 1;
  double ratio = 0.75;
};

gwa::TokenVisibility masked_visibility(std::uint64_t seed, int tokens_h, int tokens_w,
                                       int unit_span, double ratio) {
  if (tokens_h % unit_span != 0 || tokens_w % unit_span != 0) {
    throw std::invalid_argument("token grid must be divisible by --unit-span");
  }
  const gwa::Mask mask =
      gwa::gen_batch_mask(seed, tokens_h / unit_span, tokens_w / unit_span, ratio);
  return gwa::expand_to_tokens(mask, unit_span);
}

int run_windows(const WindowOpts& opt) {
  const gwa::StageGeometry geom{opt.tokens_h, opt.tokens_w, opt.window,
                                opt.shift[0],  opt.shift[1], 0,
                                opt.unit_span};
  const gwa::WindowLayout layout = gwa::partition_windows(geom);
  const gwa::TokenVisibility vis =
      masked_visibility(opt.seed, opt.tokens_h, opt.tokens_w, opt.unit_span, opt.ratio);
  const std::vector<int> counts = gwa::visible_counts(layout, vis);

  json doc;
  doc["command"] = "windows";
  doc["version"] = GWA_VERSION_STRING;
  doc["config"] = {{"seed", opt.seed},         {"tokens_h", opt.tokens_h},
                   {"tokens_w", opt.tokens_w}, {"window", opt.window},
                   {"shift", opt.shift},       {"unit_span", opt.unit_span},
                   {"ratio", opt.ratio}};
  doc["num_windows"] = static_cast<int>(layout.windows.size());
  doc["total_visible"] = vis.visible_count();
  doc["counts"] = counts;
  json windows = json::array();
  for (const gwa::Window& win : layout.windows) {
    windows.push_back({{"id", win.id},
                       {"origin", {win.origin_row, win.origin_col}},
                       {"size", {win.height, win.width}},
                       {"tokens", win.size()},
                       {"visible", counts[static_cast<std::size_t>(win.id)]}});
  }
  doc["windows"] = std::move(windows);
  emit(doc, "");
  return 0;
}

// ---------------------------------------------------------------------------
// group
// ---------------------------------------------------------------------------

struct GroupOpts {
  std::vector<int> sizes;
  std::uint64_t seed = 0;
  int tokens_h = 56;
  int tokens_w = 56;
  int window = 7;
  std::vector<int> shift = {0, 0};
  int unit_span = 1;
  double ratio = 0.75;
  int channels = 128;
  int group_size = 0;  // 0 = sweep for the optimum
  std::string csv_path;
};

json plan_to_json(const gwa::GroupPlan& plan) {
  return {{"group_size", plan.group_size},
          {"num_groups", plan.num_groups()},
          {"groups", plan.groups},
          {"fill", plan.fill},
          {"padding", plan.padding},
          {"cost_flops", plan.cost_flops}};
}

int run_group(const GroupOpts& opt) {
  std::vector<int> sizes = opt.sizes;
  if (sizes.empty()) {
    const gwa::StageGeometry geom{opt.tokens_h, opt.tokens_w, opt.window,
                                  opt.shift[0],  opt.shift[1], opt.channels,
                                  opt.unit_span};
    const gwa::WindowLayout layout = gwa::partition_windows(geom);
    const gwa::TokenVisibility vis =
        masked_visibility(opt.seed, opt.tokens_h, opt.tokens_w, opt.unit_span, opt.ratio);
    sizes = gwa::drop_empty(gwa::visible_counts(layout, vis)).sizes;
  }
  if (sizes.empty()) {
    throw std::runtime_error("no visible tokens: nothing to group");
  }
  if (opt.group_size > 0 && !opt.csv_path.empty()) {
    throw std::invalid_argument("--csv dumps the sweep; it cannot be combined with a fixed --gs");
  }

  json doc;
  doc["command"] = "group";
  doc["version"] = GWA_VERSION_STRING;
  doc["config"] = {{"seed", opt.seed},   {"channels", opt.channels},
                   {"gs", opt.group_size}, {"ratio", opt.ratio},
                   {"sizes_given", !opt.sizes.empty()}};
  doc["sizes"] = sizes;

  if (opt.group_size > 0) {
    gwa::GroupPlan plan = gwa::partition(opt.group_size, sizes);
    plan.cost_flops = gwa::plan_cost(plan, opt.channels);
    doc["plan"] = plan_to_json(plan);
    doc["report"] = nullptr;
  } else {
    const gwa::GroupingResult result = gwa::optimal_grouping(sizes, opt.channels);
    doc["plan"] = plan_to_json(result.plan);
    json candidates = json::array();
    for (const auto& cand : result.report.candidates) {
      candidates.push_back(
          {{"g_s", cand.group_size}, {"n_g", cand.num_groups}, {"flops", cand.flops}});
    }
    doc["report"] = {{"optimal_group_size", result.report.optimal_group_size},
                     {"optimal_flops", result.report.optimal_flops},
                     {"candidates", std::move(candidates)}};
    if (!opt.csv_path.empty()) {
      std::ofstream out = open_output(opt.csv_path);
      out << "g_s,n_g,flops\n";
      for (const auto& cand : result.report.candidates) {
        out << cand.group_size << "," << cand.num_groups << "," << cand.flops << "\n";
      }
    }
  }
  emit(doc, "");
  return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyOpts {
  int stage = 1;
  std::uint64_t seed = 0;
  double ratio = 0.75;
  std::vector<int> shift = {0, 0};
  int heads = 4;
  int channels = 0;  // 0 = stage default
  double tolerance = 1e-9;
};

int run_verify(const VerifyOpts& opt) {
  const gwa::StageConfig stage = gwa::stage_config(opt.stage);
  const int channels = opt.channels > 0 ? opt.channels : stage.channels;
  gwa::StageGeometry geom = stage.geometry();
  geom.shift_y = opt.shift[0];
  geom.shift_x = opt.shift[1];
  geom.channels = channels;

  const gwa::Mask mask =
      gwa::gen_batch_mask(opt.seed, stage.units_h(), stage.units_w(), opt.ratio);
  const gwa::TokenVisibility vis = gwa::expand_to_tokens(mask, stage.unit_span);
  const gwa::WindowLayout layout = gwa::partition_windows(geom);
  const gwa::VisibleWindows windows = gwa::drop_empty(gwa::visible_counts(layout, vis));

  const gwa::GroupingResult grouping = gwa::optimal_grouping(windows.sizes, channels);

  gwa::TokenArray<double> tokens = gwa::collect_visible<double>(layout, vis, channels);
  gwa::randomize_values(tokens, gwa::mix_seed(opt.seed, 2));
  const auto params = gwa::random_attention_params<double>(channels, opt.heads, stage.window,
                                                           gwa::mix_seed(opt.seed, 3));

  const auto gathered = gwa::gather_groups(tokens, grouping.plan);
  const auto grouped = gwa::scatter_groups(gwa::masked_group_attention(gathered, params));
  const auto reference = gwa::reference_window_attention(tokens, params);
  const double err = gwa::max_rel_error(grouped, reference);
  const bool pass = err <= opt.tolerance;

  json doc;
  doc["command"] = "verify";
  doc["version"] = GWA_VERSION_STRING;
  doc["config"] = {{"stage", opt.stage},     {"seed", opt.seed},
                   {"ratio", opt.ratio},     {"shift", opt.shift},
                   {"heads", opt.heads},     {"channels", channels},
                   {"tolerance", opt.tolerance}};
  doc["visible_tokens"] = tokens.count();
  doc["num_windows"] = static_cast<int>(layout.windows.size());
  doc["nonempty_windows"] = static_cast<int>(windows.sizes.size());
  doc["group_size"] = grouping.plan.group_size;
  doc["num_groups"] = grouping.plan.num_groups();
  doc["max_rel_error"] = err;
  doc["pass"] = pass;
  emit(doc, "");
  return pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOpts {
  std::string stage = "all";
  double ratio = 0.75;
  int trials = 100;
  std::uint64_t seed = 0;
  int channels = 0;  // 0 = per-stage default
  std::string csv_path;
  std::string json_path;
  int threads = 1;
};

std::string stage_csv_path(const std::string& base, int stage, bool multi) {
  if (!multi) return base;
  const std::size_t dot = base.find_last_of('.');
  const std::string suffix = "_stage" + std::to_string(stage);
  if (dot == std::string::npos) return base + suffix;
  return base.substr(0, dot) + suffix + base.substr(dot);
}

int run_simulate(const SimulateOpts& opt) {
  std::vector<gwa::StageConfig> stages;
  if (opt.stage == "all") {
    const auto defaults = gwa::default_stages();
    stages.assign(defaults.begin(), defaults.end());
  } else {
    stages.push_back(gwa::stage_config(std::stoi(opt.stage)));
  }
  for (gwa::StageConfig& s : stages) {
    if (opt.channels > 0) s.channels = opt.channels;
  }

  json doc;
  doc["command"] = "simulate";
  doc["version"] = GWA_VERSION_STRING;
  doc["config"] = {{"stage", opt.stage},     {"ratio", opt.ratio},
                   {"trials", opt.trials},   {"seed", opt.seed},
                   {"channels", opt.channels}, {"threads", opt.threads},
                   {"out", opt.csv_path},    {"json", opt.json_path}};
  doc["stages"] = json::array();

  for (const gwa::StageConfig& stage : stages) {
    const gwa::SweepStats stats =
        gwa::sweep_cost_curve(stage, opt.ratio, opt.trials, opt.seed, opt.threads);

    json entry;
    entry["stage"] = stats.stage;
    entry["channels"] = stats.channels;
    entry["trials"] = stats.trials;
    entry["trials_skipped"] = stats.trials_skipped;
    entry["single_window"] = stats.single_window;
    if (stats.single_window) entry["note"] = "single local window: grouping unnecessary";
    if (!stats.curve.empty()) {
      entry["sweep_min_gs"] = stats.curve.front().group_size;
      entry["sweep_max_gs"] = stats.curve.back().group_size;
      entry["mean_curve_argmin"] = stats.mean_curve_argmin;
    }
    entry["argmin_per_trial"] = stats.argmin_per_trial;

    if (!opt.csv_path.empty()) {
      const std::string path = stage_csv_path(opt.csv_path, stage.id, stages.size() > 1);
      std::ofstream out = open_output(path);
      out << "g_s,mean_flops,std_flops,trials_valid\n";
      for (const gwa::CurvePoint& point : stats.curve) {
        out << point.group_size << "," << format_double(point.mean_flops) << ","
            << format_double(point.std_flops) << "," << point.trials_valid << "\n";
      }
      entry["csv"] = path;
    } else {
      entry["csv"] = nullptr;
    }
    doc["stages"].push_back(std::move(entry));
  }
  emit(doc, opt.json_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"group window attention scheduling toolbox"};
  app.set_version_flag("--version", GWA_VERSION_STRING);
  app.require_subcommand(0, 1);
  bool want_help_json = false;
  app.add_flag("--help-json", want_help_json, "print the command tree as JSON and exit");

  MaskOpts mask_opts;
  CLI::App* mask_cmd = app.add_subcommand("mask", "generate a batch-wise random mask");
  mask_cmd->add_option("--seed", mask_opts.seed, "RNG seed")->capture_default_str();
  mask_cmd->add_option("--units-h", mask_opts.units_h, "mask units vertically")->capture_default_str();
  mask_cmd->add_option("--units-w", mask_opts.units_w, "mask units horizontally")->capture_default_str();
  mask_cmd->add_option("--ratio", mask_opts.ratio, "mask ratio in [0,1)")->capture_default_str();
  mask_cmd->add_option("--unit-span", mask_opts.unit_span, "tokens per unit side")->capture_default_str();
  mask_cmd->add_option("--format", mask_opts.format, "output format")
      ->check(CLI::IsMember({"json", "ascii"}))
      ->capture_default_str();

  WindowOpts window_opts;
  CLI::App* windows_cmd = app.add_subcommand("windows", "partition a token grid and count visible tokens");
  windows_cmd->add_option("--seed", window_opts.seed, "RNG seed")->capture_default_str();
  windows_cmd->add_option("--tokens-h", window_opts.tokens_h, "token grid height")->capture_default_str();
  windows_cmd->add_option("--tokens-w", window_opts.tokens_w, "token grid width")->capture_default_str();
  windows_cmd->add_option("--window", window_opts.window, "window side in tokens")->capture_default_str();
  windows_cmd->add_option("--shift", window_opts.shift, "tiling offset dy,dx")
      ->expected(2)
      ->delimiter(',')
      ->capture_default_str();
  windows_cmd->add_option("--unit-span", window_opts.unit_span, "tokens per mask unit side")->capture_default_str();
  windows_cmd->add_option("--ratio", window_opts.ratio, "mask ratio in [0,1)")->capture_default_str();

  GroupOpts group_opts;
  CLI::App* group_cmd = app.add_subcommand("group", "solve the optimal grouping for window sizes");
  CLI::Option* sizes_opt = group_cmd->add_option("--sizes", group_opts.sizes, "visible counts per window")
                               ->delimiter(',');
  group_cmd->add_option("--seed", group_opts.seed, "RNG seed (derived sizes)")->capture_default_str();
  group_cmd->add_option("--tokens-h", group_opts.tokens_h, "token grid height")->capture_default_str()->excludes(sizes_opt);
  group_cmd->add_option("--tokens-w", group_opts.tokens_w, "token grid width")->capture_default_str()->excludes(sizes_opt);
  group_cmd->add_option("--window", group_opts.window, "window side in tokens")->capture_default_str()->excludes(sizes_opt);
  group_cmd->add_option("--shift", group_opts.shift, "tiling offset dy,dx")
      ->expected(2)
      ->delimiter(',')
      ->excludes(sizes_opt);
  group_cmd->add_option("--unit-span", group_opts.unit_span, "tokens per mask unit side")->capture_default_str()->excludes(sizes_opt);
  group_cmd->add_option("--ratio", group_opts.ratio, "mask ratio (derived sizes)")->capture_default_str()->excludes(sizes_opt);
  group_cmd->add_option("--channels", group_opts.channels, "attention channel width")->capture_default_str();
  group_cmd->add_option("--gs", group_opts.group_size, "fixed group size (0 = sweep)")->capture_default_str();
  group_cmd->add_option("--csv", group_opts.csv_path, "write the sweep as CSV to this path");

  VerifyOpts verify_opts;
  CLI::App* verify_cmd = app.add_subcommand("verify", "check grouped attention against the per-window reference");
  verify_cmd->add_option("--stage", verify_opts.stage, "stage id 1..4")
      ->check(CLI::Range(1, 4))
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify_opts.seed, "RNG seed")->capture_default_str();
  verify_cmd->add_option("--ratio", verify_opts.ratio, "mask ratio in [0,1)")->capture_default_str();
  verify_cmd->add_option("--shift", verify_opts.shift, "tiling offset dy,dx")
      ->expected(2)
      ->delimiter(',')
      ->capture_default_str();
  verify_cmd->add_option("--heads", verify_opts.heads, "attention heads")->capture_default_str();
  verify_cmd->add_option("--channels", verify_opts.channels, "override stage channel width (0 = default)")
      ->capture_default_str();
  verify_cmd->add_option("--tolerance", verify_opts.tolerance, "max relative error accepted")
      ->capture_default_str();

  SimulateOpts simulate_opts;
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "sweep cost curves over repeated random masks");
  simulate_cmd->add_option("--stage", simulate_opts.stage, "stage id or 'all'")
      ->check(CLI::IsMember({"1", "2", "3", "4", "all"}))
      ->capture_default_str();
  simulate_cmd->add_option("--ratio", simulate_opts.ratio, "mask ratio in [0,1)")->capture_default_str();
  simulate_cmd->add_option("--trials", simulate_opts.trials, "number of random masks")->capture_default_str();
  simulate_cmd->add_option("--seed", simulate_opts.seed, "base RNG seed (trial t uses seed+t)")->capture_default_str();
  simulate_cmd->add_option("--channels", simulate_opts.channels, "override channel width for all stages (0 = defaults)")
      ->capture_default_str();
  simulate_cmd->add_option("--out", simulate_opts.csv_path, "CSV path for the cost curve(s)");
  simulate_cmd->add_option("--json", simulate_opts.json_path, "write the JSON summary here instead of stdout");
  simulate_cmd->add_option("--threads", simulate_opts.threads, "worker threads for trials")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (want_help_json) {
    std::cout << help_json(app).dump(2) << "\n";
    return 0;
  }

  try {
    if (mask_cmd->parsed()) return run_mask(mask_opts);
    if (windows_cmd->parsed()) return run_windows(window_opts);
    if (group_cmd->parsed()) return run_group(group_opts);
    if (verify_cmd->parsed()) return run_verify(verify_opts);
    if (simulate_cmd->parsed()) return run_simulate(simulate_opts);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  std::cout << app.help();
  return 0;
}
