// Copyright 2026 The qpyramid Authors
//
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

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qpyr/geometry.hpp"
#include "qpyr/information.hpp"
#include "qpyr/measurement.hpp"
#include "qpyr/optimizer.hpp"

namespace {

using nlohmann::json;
using namespace qpyr;

// Exit codes: 0 success, 1 usage, 2 domain, 3 numerical/convergence/IO,
// 4 verification failure.
constexpr int kExitUsage = 1;
constexpr int kExitDomain = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerification = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip representation; used for CSV so output is
/// byte-identical across runs.
std::string shortest(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// 12 significant digits for the plain-text reports.
std::string plain12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct OutputTarget {
  std::string path;  // empty = stdout

  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      if (!std::cout.good()) throw std::ios_base::failure("stdout write failed");
      std::cout.flush();
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open output file: " + path);
    out << text;
    out.flush();
    if (!out.good()) throw std::ios_base::failure("write failed: " + path);
  }
};

enum class Format { Plain, Csv, Json };

Format parse_format(const std::string& name) {
  if (name == "plain") return Format::Plain;
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw UsageError("unknown format: " + name);
}

SchemeTag parse_scheme(const std::string& name) {
  if (name == "srm") return SchemeTag::Srm;
  if (name == "mud") return SchemeTag::Mud;
  if (name == "mud_refined" || name == "mud-refined") return SchemeTag::MudRefined;
  if (name == "ims") return SchemeTag::Ims;
  if (name == "unified" || name == "custom") return SchemeTag::Custom;
  throw UsageError("unknown scheme: " + name);
}

struct ParamArgs {
  int n = 0;
  std::optional<double> r0;
  std::optional<double> nr0;

  PyramidParams resolve() const {
    if (r0.has_value() == nr0.has_value())
      throw UsageError("provide exactly one of --r0 / --nr0");
    return make_pyramid(n, r0 ? *r0 : *nr0 / n);
  }
};

void add_param_options(CLI::App* cmd, ParamArgs& args) {
  cmd->add_option("--n", args.n, "number of edge states")->required();
  auto* r0 = cmd->add_option("--r0", args.r0, "height overlap parameter in [0, 1]");
  cmd->add_option("--nr0", args.nr0, "n * r0 (the natural plot axis)")->excludes(r0);
}

struct SchemeReport {
  SchemeTag tag;
  double info_bits;
  double t_opt;
};

SchemeReport evaluate_scheme(const PyramidParams& params, SchemeTag tag,
                             std::optional<double> t, std::optional<double> w2) {
  switch (tag) {
    case SchemeTag::Srm:
      return {tag, srm_info(params), 1.0};
    case SchemeTag::Mud:
    case SchemeTag::MudRefined: {
      const double t_dual = params.is_flat()
                                ? std::numeric_limits<double>::infinity()
                                : std::sqrt(params.r1 / params.r0);
      return {tag, mud_info(params, tag == SchemeTag::MudRefined), t_dual};
    }
    case SchemeTag::Ims: {
      const SchemeSpec spec = ims_spec(params);
      return {tag, ims_info(params), spec.t};
    }
    case SchemeTag::Custom: {
      if (!t || !w2) throw UsageError("scheme 'unified' needs --t and --w2");
      const SchemeSpec spec = custom_spec(*t, *w2);
      return {tag, unified_info(params, spec), spec.t};
    }
  }
  throw std::logic_error("unreachable");
}

int cmd_info(const ParamArgs& args, const std::string& scheme_name_in, Format format,
             std::optional<double> t, std::optional<double> w2, const OutputTarget& out) {
  const PyramidParams params = args.resolve();
  const SchemeTag tag = parse_scheme(scheme_name_in);
  const SchemeReport report = evaluate_scheme(params, tag, t, w2);
  const double srm_bits = srm_info(params);
  const double ratio =
      srm_bits > 0 ? report.info_bits / srm_bits : std::numeric_limits<double>::quiet_NaN();

  if (format == Format::Json) {
    json j;
    j["subcommand"] = "info";
    j["n"] = params.n;
    j["r0"] = params.r0;
    j["nr0"] = params.n * params.r0;
    j["classification"] = params.shape_name();
    j["volume"] = volume(params);
    j["scheme"] = scheme_name(tag);
    j["info_bits"] = report.info_bits;
    j["srm_info_bits"] = srm_bits;
    j["ratio_to_srm"] = ratio;
    j["guess_odds"] = guess_odds(params);
    j["mud_failure"] = mud_failure(params);
    j["t_opt"] = std::isinf(report.t_opt) ? json("inf") : json(report.t_opt);
    out.write(j.dump(2) + "\n");
    return 0;
  }
  if (format == Format::Csv) {
    std::ostringstream csv;
    csv << "n,r0,nr0,classification,volume,scheme,info_bits,srm_info_bits,ratio_to_srm,"
           "guess_odds,mud_failure,t_opt\n";
    csv << params.n << ',' << shortest(params.r0) << ',' << shortest(params.n * params.r0)
        << ',' << params.shape_name() << ',' << shortest(volume(params)) << ','
        << scheme_name(tag) << ',' << shortest(report.info_bits) << ','
        << shortest(srm_bits) << ',' << shortest(ratio) << ','
        << shortest(guess_odds(params)) << ',' << shortest(mud_failure(params)) << ','
        << shortest(report.t_opt) << '\n';
    out.write(csv.str());
    return 0;
  }
  std::ostringstream text;
  text << "n               " << params.n << '\n'
       << "r0              " << plain12(params.r0) << '\n'
       << "nr0             " << plain12(params.n * params.r0) << '\n'
       << "classification  " << params.shape_name() << '\n'
       << "volume          " << plain12(volume(params)) << '\n'
       << "scheme          " << scheme_name(tag) << '\n'
       << "info_bits       " << plain12(report.info_bits) << '\n'
       << "srm_info_bits   " << plain12(srm_bits) << '\n'
       << "ratio_to_srm    " << plain12(ratio) << '\n'
       << "guess_odds      " << plain12(guess_odds(params)) << '\n'
       << "mud_failure     " << plain12(mud_failure(params)) << '\n'
       << "t_opt           " << plain12(report.t_opt) << '\n';
  out.write(text.str());
  return 0;
}

json pom_to_json(const PyramidParams& params, const Pom& pom, const SchemeSpec& spec) {
  json outcomes = json::array();
  for (const auto& o : pom.outcomes) {
    json rows = json::array();
    for (int i = 0; i < o.op.rows(); ++i) {
      json row = json::array();
      for (int j = 0; j < o.op.cols(); ++j) row.push_back(o.op(i, j));
      rows.push_back(row);
    }
    outcomes.push_back({{"label", o.label.str()}, {"weight", o.weight}, {"matrix", rows}});
  }
  const PomReport report = validate_pom(pom);
  json j;
  j["subcommand"] = "pom";
  j["n"] = params.n;
  j["r0"] = params.r0;
  j["nr0"] = params.n * params.r0;
  j["scheme"] = scheme_name(spec.tag);
  j["spec"] = {{"t", std::isinf(spec.t) ? json("inf") : json(spec.t)},
               {"w1", spec.w1},
               {"w2", spec.w2},
               {"w3", spec.w3}};
  j["outcomes"] = outcomes;
  j["validation"] = {{"completeness_residual", report.completeness_residual},
                     {"min_eigenvalue", report.min_eigenvalue}};
  return j;
}

int cmd_pom(const ParamArgs& args, const std::string& scheme_name_in, Format format,
            std::optional<double> t, std::optional<double> w2, const OutputTarget& out) {
  if (format == Format::Csv)
    throw UsageError("pom output is JSON; --format csv is not supported");
  const PyramidParams params = args.resolve();
  const SchemeTag tag = parse_scheme(scheme_name_in);
  Pom pom;
  SchemeSpec spec;
  switch (tag) {
    case SchemeTag::Srm:
      spec = srm_spec();
      pom = srm(params);
      break;
    case SchemeTag::Mud:
    case SchemeTag::MudRefined:
      spec = mud_spec(params, tag == SchemeTag::MudRefined);
      pom = mud(params, tag == SchemeTag::MudRefined);
      break;
    case SchemeTag::Ims: {
      auto built = ims(params);
      pom = std::move(built.first);
      spec = built.second;
      break;
    }
    case SchemeTag::Custom: {
      if (!t || !w2) throw UsageError("scheme 'unified' needs --t and --w2");
      spec = custom_spec(*t, *w2);
      pom = unified_pom(params, spec);
      break;
    }
  }
  out.write(pom_to_json(params, pom, spec).dump(2) + "\n");
  return 0;
}

int cmd_sweep(int n, double nr0_min, double nr0_max, int steps,
              const std::vector<std::string>& scheme_names, const std::string& axis_name,
              int threads, Format format, const OutputTarget& out) {
  if (steps < 1) throw UsageError("--steps must be >= 1");
  if (!(nr0_min <= nr0_max)) throw UsageError("--nr0-min must be <= --nr0-max");
  if (scheme_names.empty()) throw UsageError("--schemes must name at least one scheme");
  SweepAxis axis;
  if (axis_name == "nr0")
    axis = SweepAxis::Nr0;
  else if (axis_name == "nr1")
    axis = SweepAxis::Nr1;
  else
    throw UsageError("--axis must be nr0 or nr1");

  std::vector<SchemeTag> schemes;
  for (const auto& name : scheme_names) {
    const SchemeTag tag = parse_scheme(name);
    if (tag == SchemeTag::Custom)
      throw UsageError("sweep supports srm, mud, mud_refined, ims");
    schemes.push_back(tag);
  }
  std::vector<double> grid(steps);
  for (int i = 0; i < steps; ++i)
    grid[i] = steps == 1 ? nr0_min : nr0_min + (nr0_max - nr0_min) * i / (steps - 1.0);

  const auto rows = sweep(n, grid, schemes, axis, threads);

  if (format == Format::Json) {
    json arr = json::array();
    for (const auto& row : rows) {
      arr.push_back({{"n", row.n},
                     {"nr0", row.nr0},
                     {"scheme", scheme_name(row.scheme)},
                     {"info_bits", row.info_bits},
                     {"srm_info_bits", row.srm_info_bits},
                     {"ratio", row.ratio_to_srm},
                     {"t_opt", std::isinf(row.t_opt) ? json("inf") : json(row.t_opt)},
                     {"failure_prob", row.failure_prob}});
    }
    out.write(arr.dump(2) + "\n");
    return 0;
  }
  std::ostringstream csv;
  csv << "n,nr0,scheme,info_bits,srm_info_bits,ratio,t_opt,failure_prob\n";
  for (const auto& row : rows) {
    csv << row.n << ',' << shortest(row.nr0) << ',' << scheme_name(row.scheme) << ','
        << shortest(row.info_bits) << ',' << shortest(row.srm_info_bits) << ','
        << shortest(row.ratio_to_srm) << ',' << shortest(row.t_opt) << ','
        << shortest(row.failure_prob) << '\n';
  }
  out.write(csv.str());
  return 0;
}

int cmd_threshold(int n, Format format, const OutputTarget& out) {
  if (n < 3) throw UsageError("--n must be >= 3 for the threshold search");
  const ThresholdResult result = threshold_nr0(n);
  if (format == Format::Json) {
    json j;
    j["subcommand"] = "threshold";
    j["n"] = n;
    j["found"] = result.found;
    j["nr0_threshold"] = result.found ? json(result.nr0) : json(nullptr);
    j["width"] = result.found ? json(result.width) : json(nullptr);
    out.write(j.dump(2) + "\n");
    return 0;
  }
  std::ostringstream text;
  text << "n               " << n << '\n';
  if (result.found) {
    text << "nr0_threshold   " << plain12(result.nr0) << '\n'
         << "width           " << plain12(result.width) << '\n';
  } else {
    text << "nr0_threshold   none\n";
  }
  out.write(text.str());
  return 0;
}

int cmd_verify(const ParamArgs& args, std::uint64_t seed, int restarts, int k_outcomes,
               int max_iterations, double gap_tol, Format format, const OutputTarget& out) {
  const PyramidParams params = args.resolve();
  const double closed = ims_info(params);
  const auto states = pyramid_ensemble(params);
  const auto priors = uniform_priors(params.n);
  const int k = k_outcomes > 0 ? k_outcomes : params.n * (params.n + 1) / 2;

  AscentConfig config;
  config.rng_seed = seed;
  config.restarts = restarts;
  config.max_iterations = max_iterations;
  const AscentResult ascent = steepest_ascent_ims(states, priors, k, config);
  const double gap = std::abs(ascent.info_bits - closed);

  double residual_closed = std::numeric_limits<double>::quiet_NaN();
  {
    const auto built = ims(params);
    residual_closed =
        necessary_condition_residual(states, priors, built.first, ConditionMode::Ims);
  }
  const double residual_ascent =
      necessary_condition_residual(states, priors, ascent.pom, ConditionMode::Ims);

  const bool pass = gap <= gap_tol;
  if (format == Format::Json) {
    json j;
    j["subcommand"] = "verify";
    j["n"] = params.n;
    j["r0"] = params.r0;
    j["nr0"] = params.n * params.r0;
    j["closed_form_bits"] = closed;
    j["ascent_bits"] = ascent.info_bits;
    j["gap_bits"] = gap;
    j["gap_tolerance"] = gap_tol;
    j["residual_closed_pom"] = residual_closed;
    j["residual_ascent_pom"] = residual_ascent;
    j["ascent_completeness"] = ascent.completeness_residual;
    j["pass"] = pass;
    out.write(j.dump(2) + "\n");
  } else {
    std::ostringstream text;
    text << "n                    " << params.n << '\n'
         << "nr0                  " << plain12(params.n * params.r0) << '\n'
         << "closed_form_bits     " << plain12(closed) << '\n'
         << "ascent_bits          " << plain12(ascent.info_bits) << '\n'
         << "gap_bits             " << plain12(gap) << '\n'
         << "residual_closed_pom  " << plain12(residual_closed) << '\n'
         << "residual_ascent_pom  " << plain12(residual_ascent) << '\n'
         << "ascent_completeness  " << plain12(ascent.completeness_residual) << '\n'
         << "verdict              " << (pass ? "pass" : "fail") << '\n';
    out.write(text.str());
  }
  return pass ? 0 : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum pyramid measurement toolkit"};
  app.require_subcommand(1);

  std::string format_name = "plain";
  std::string output_path;
  app.add_option("--format", format_name, "output format: plain, csv, json")
      ->capture_default_str();
  app.add_option("--output,-o", output_path, "write output to a file instead of stdout");

  auto* info = app.add_subcommand("info", "closed-form information report for one shape");
  ParamArgs info_args;
  add_param_options(info, info_args);
  std::string info_scheme = "srm";
  std::optional<double> info_t, info_w2;
  info->add_option("--scheme", info_scheme, "srm, mud, mud_refined, ims, unified")
      ->capture_default_str();
  info->add_option("--t", info_t, "lift parameter for scheme 'unified'");
  info->add_option("--w2", info_w2, "edge-outcome weight for scheme 'unified'");

  auto* pom = app.add_subcommand("pom", "emit the measurement operators as JSON");
  ParamArgs pom_args;
  add_param_options(pom, pom_args);
  std::string pom_scheme = "srm";
  std::optional<double> pom_t, pom_w2;
  pom->add_option("--scheme", pom_scheme, "srm, mud, mud_refined, ims, unified")
      ->capture_default_str();
  pom->add_option("--t", pom_t, "lift parameter for scheme 'unified'");
  pom->add_option("--w2", pom_w2, "edge-outcome weight for scheme 'unified'");

  auto* sweep_cmd = app.add_subcommand("sweep", "tabulate schemes over a shape grid (CSV)");
  int sweep_n = 0, sweep_steps = 0, sweep_threads = 1;
  double sweep_min = 0.0, sweep_max = 1.0;
  std::vector<std::string> sweep_schemes;
  std::string sweep_axis = "nr0";
  sweep_cmd->add_option("--n", sweep_n, "number of edge states")->required();
  sweep_cmd->add_option("--nr0-min", sweep_min, "grid start")->required();
  sweep_cmd->add_option("--nr0-max", sweep_max, "grid end")->required();
  sweep_cmd->add_option("--steps", sweep_steps, "number of grid points")->required();
  sweep_cmd->add_option("--schemes", sweep_schemes, "comma-separated scheme list")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--axis", sweep_axis,
                        "grid meaning: nr0 (obtuse side) or nr1 (acute side)")
      ->capture_default_str();
  sweep_cmd->add_option("--threads", sweep_threads, "worker thread cap")
      ->capture_default_str();

  auto* threshold_cmd =
      app.add_subcommand("threshold", "locate the obtuse n r0 threshold for t > 1");
  int threshold_n = 0;
  threshold_cmd->add_option("--n", threshold_n, "number of edge states")->required();

  auto* verify = app.add_subcommand("verify", "cross-check the closed form with the ascent");
  ParamArgs verify_args;
  add_param_options(verify, verify_args);
  std::uint64_t verify_seed = 0;
  int verify_restarts = 10, verify_k = 0, verify_iters = 20000;
  double verify_gap_tol = 1e-6;
  verify->add_option("--seed", verify_seed, "random seed")->capture_default_str();
  verify->add_option("--restarts", verify_restarts, "ascent restarts")->capture_default_str();
  verify->add_option("--k-outcomes", verify_k, "outcome count (default n(n+1)/2)");
  verify->add_option("--max-iterations", verify_iters, "ascent iteration cap")
      ->capture_default_str();
  verify->add_option("--gap-tol", verify_gap_tol, "pass/fail gap tolerance in bits")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const OutputTarget out{output_path};
  try {
    const Format format = parse_format(format_name);
    if (info->parsed()) return cmd_info(info_args, info_scheme, format, info_t, info_w2, out);
    if (pom->parsed()) return cmd_pom(pom_args, pom_scheme, format, pom_t, pom_w2, out);
    if (sweep_cmd->parsed())
      return cmd_sweep(sweep_n, sweep_min, sweep_max, sweep_steps, sweep_schemes, sweep_axis,
                       sweep_threads, format, out);
    if (threshold_cmd->parsed()) return cmd_threshold(threshold_n, format, out);
    if (verify->parsed())
      return cmd_verify(verify_args, verify_seed, verify_restarts, verify_k, verify_iters,
                        verify_gap_tol, format, out);
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::runtime_error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
