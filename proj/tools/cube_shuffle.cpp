#include "cubeshuffle/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace cubeshuffle;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

Json value_json(const LoopValue& v) {
  Json out = Json::array();
  if (v.exact)
    for (const auto& q : v.q) out.push_back(to_json(q));
  else
    for (double f : v.f) out.push_back(f);
  return out;
}

std::vector<Point> grid_points(std::size_t n, std::size_t side) {
  std::vector<Point> pts;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= side;
  const long den = static_cast<long>(side) - 1;
  for (std::size_t code = 0; code < total; ++code) {
    Point p;
    for (std::size_t i = 0, c = code; i < n; ++i, c /= side) p.emplace_back(static_cast<long>(c % side), den);
    pts.push_back(std::move(p));
  }
  return pts;
}

Json eval_json(const EvalResult& r, const Point& s) {
  Json j{{"s", to_json(s)}, {"value", value_json(r.value)}, {"exact", r.value.exact},
         {"error_bound", to_json(r.error_bound)}};
  j["index"] = r.index ? Json(*r.index) : Json(nullptr);
  return j;
}

int cmd_validate(const std::string& file, Index bound) {
  const NDomain d = domain_from_json(read_json_file(file));
  const auto rep = validate(d, bound);
  Json j{{"schema", "cube-shuffle/validate/1"},
         {"valid", rep.valid},
         {"exhaustive", rep.exhaustive},
         {"checked_indices", rep.checked_indices},
         {"certificate", rep.certificate}};
  if (rep.offending) j["offending"] = {rep.offending->first, rep.offending->second};
  std::cout << j.dump(2) << '\n';
  if (!rep.valid)
    std::cerr << "invalid: cubes " << rep.offending->first << " and " << rep.offending->second << " overlap\n";
  return rep.valid ? kOk : kFailed;
}

int cmd_plan(const std::string& file, const std::string& out, Index bound) {
  const Scenario sc = scenario_from_json(read_json_file(file));
  ShufflePlan plan = [&] {
    try {
      return shuffle(sc.r, sc.s, sc.fixed);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(std::string("plan construction failed: ") + e.what());
    }
  }();
  const Json j = plan_to_json(plan, bound);
  if (out.empty())
    std::cout << j.dump(2) << '\n';
  else
    write_json_file(out, j);
  std::cerr << "plan: " << j["provenance"].size() << " provenance entries, " << j["stages"].size() << " stages\n";
  return kOk;
}

int cmd_verify(const std::string& file, Index bound) {
  const LoadedPlan loaded = plan_from_json(read_json_file(file));
  const ShufflePlan plan = plan_for_bound(loaded, bound);
  const auto rep = verify(plan.schedule, bound);
  std::cout << rep.to_json().dump(2) << '\n';
  if (!rep.ok && rep.failure) std::cerr << "verification failed: " << rep.failure->message << '\n';
  return rep.ok ? kOk : kFailed;
}

int cmd_eval(const std::string& plan_file, const std::string& scenario_file, const std::string& concat_side,
             std::size_t points, const std::string& times, Index bound) {
  if (points < 2) throw CLI::ValidationError("--points", "needs at least 2");
  const Scenario sc = scenario_from_json(read_json_file(scenario_file));
  const KSequence seq = scenario_sequence(sc);
  const auto pts = grid_points(sc.r.dim(), points);
  Json out{{"schema", "cube-shuffle/eval/1"}, {"points", points}};
  Json rows = Json::array();
  if (plan_file.empty()) {
    const NDomain& d = concat_side == "S" ? sc.s : sc.r;
    const auto loop = concatenate(d, seq, bound);
    out["mode"] = "concatenation";
    out["side"] = concat_side;
    for (const auto& s : pts) rows.push_back(eval_json(loop(s), s));
  } else {
    const LoadedPlan loaded = plan_from_json(read_json_file(plan_file));
    const ShufflePlan plan = plan_for_bound(loaded, bound);
    out["mode"] = "homotopy";
    for (const auto& t : parse_times(times)) {
      Json at{{"t", to_json(t)}};
      Json vals = Json::array();
      for (const auto& s : pts) vals.push_back(eval_json(eval_homotopy(plan.schedule, seq, s, t, bound), s));
      at["values"] = vals;
      rows.push_back(at);
    }
  }
  out["results"] = rows;
  std::cout << out.dump(2) << '\n';
  return kOk;
}

int cmd_render(const std::string& file, const std::string& times, const std::string& out_dir, Index bound) {
  const LoadedPlan loaded = plan_from_json(read_json_file(file));
  const ShufflePlan plan = plan_for_bound(loaded, bound);
  std::filesystem::create_directories(out_dir);
  std::size_t i = 0;
  for (const auto& t : parse_times(times)) {
    const Frame f = frame_at(plan.schedule, t, bound);
    const auto path = std::filesystem::path(out_dir) / ("frame_" + std::to_string(i++) + ".svg");
    std::ofstream(path) << to_svg(f);
    std::cout << path.string() << " t=" << t.str() << " rectangles=" << f.rectangles.size() << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Construct, verify, evaluate and render cube shuffle plans"};
  app.require_subcommand(1);

  Index bound = 64;
  std::size_t points = 17;
  std::string input, second, out, times = "0,1", side = "R";

  auto* validate_cmd = app.add_subcommand("validate", "Check pairwise interior-disjointness of a domain file");
  validate_cmd->add_option("domain", input, "Domain JSON")->required();
  validate_cmd->add_option("--bound", bound, "Indices to check on infinite domains");

  auto* plan_cmd = app.add_subcommand("plan", "Build a shuffle plan for a scenario");
  plan_cmd->add_option("scenario", input, "Scenario JSON")->required();
  plan_cmd->add_option("--out", out, "Plan file (stdout when omitted)");
  plan_cmd->add_option("--bound", bound, "Materialization bound for infinite plans");

  auto* verify_cmd = app.add_subcommand("verify", "Exactly verify a plan file");
  verify_cmd->add_option("plan", input, "Plan JSON")->required();
  verify_cmd->add_option("--bound", bound, "Indices to verify");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a plan's homotopy, or a bare concatenation, on a grid");
  eval_cmd->add_option("plan", input, "Plan JSON (omit with --concat)");
  eval_cmd->add_option("scenario", second, "Scenario JSON with the loop sequence");
  auto* concat_opt = eval_cmd->add_option("--concat", side, "Evaluate the bare concatenation over R or S")
                         ->check(CLI::IsMember({"R", "S"}));
  eval_cmd->add_option("--points", points, "Grid side");
  eval_cmd->add_option("--times", times, "Comma-separated times");
  eval_cmd->add_option("--bound", bound, "Truncation for infinite domains");

  auto* render_cmd = app.add_subcommand("render", "Write SVG frames of a 2-dimensional plan");
  render_cmd->add_option("plan", input, "Plan JSON")->required();
  render_cmd->add_option("--times", times, "Comma-separated times")->required();
  render_cmd->add_option("--out-dir", out, "Output directory")->required();
  render_cmd->add_option("--bound", bound, "Indices to draw");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate_cmd) return cmd_validate(input, bound);
    if (*plan_cmd) return cmd_plan(input, out, bound);
    if (*verify_cmd) return cmd_verify(input, bound);
    if (*eval_cmd) {
      if (*concat_opt) {
        // a single positional is the scenario
        return cmd_eval("", second.empty() ? input : second, side, points, times, bound);
      }
      if (second.empty()) throw CLI::ValidationError("eval", "needs a plan and a scenario, or --concat and a scenario");
      return cmd_eval(input, second, side, points, times, bound);
    }
    if (*render_cmd) return cmd_render(input, times, out, bound);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}
