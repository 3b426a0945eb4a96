#include "cubeshuffle/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cubeshuffle {

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
}

Scenario scenario_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("R") || !j.contains("S")) throw IoError("scenario needs R and S");
  Scenario sc{domain_from_json(j.at("R")), domain_from_json(j.at("S")), {}, j.value("sequence", Json())};
  if (j.contains("F")) sc.fixed = j.at("F").get<std::vector<Index>>();
  return sc;
}

Json scenario_to_json(const Scenario& sc) {
  Json j{{"R", domain_to_json(sc.r)}, {"S", domain_to_json(sc.s)}, {"F", sc.fixed}};
  if (!sc.sequence.is_null()) j["sequence"] = sc.sequence;
  return j;
}

KSequence scenario_sequence(const Scenario& sc) {
  const Json spec = sc.sequence.is_null() ? Json{{"family", "bump"}, {"decay", "harmonic"}} : sc.sequence;
  return sequence_from_json(spec, sc.r.dim(), sc.r.indices());
}

namespace {

Json index_set_json(const IndexSet& idx) {
  if (idx.is_finite()) return {{"kind", "finite"}, {"members", idx.members()}};
  return {{"kind", "nat"}, {"excluded", idx.members()}};
}

Json path_json(const CubePath& p) {
  Json kf = Json::array();
  for (const auto& k : p.keyframes()) kf.push_back({{"t", to_json(k.time)}, {"cube", to_json(k.cube)}});
  return kf;
}

CubePath path_from_json(const Json& j) {
  std::vector<Keyframe> kf;
  for (const auto& k : j) kf.push_back({rational_from_json(k.at("t")), cube_from_json(k.at("cube"))});
  return CubePath(std::move(kf));
}

Json provenance_json(const std::vector<ProvenanceEntry>& entries) {
  Json out = Json::array();
  for (const auto& e : entries) out.push_back({{"lemma", e.lemma}, {"params", e.params}});
  return out;
}

}  // namespace

Json plan_to_json(const ShufflePlan& plan, Index bound) {
  const CubeSchedule& s = plan.schedule;
  Json j;
  j["schema"] = "cube-shuffle/plan/1";
  j["n"] = s.dim();
  j["indices"] = index_set_json(s.indices());
  j["complete"] = s.is_finite();
  j["materialized_bound"] = bound;
  j["source"] = domain_to_json(s.source(), bound);
  j["target"] = domain_to_json(s.target(), bound);
  j["fixed"] = s.fixed();
  Json stages = Json::array();
  for (const auto& st : plan.stages_up_to(bound))
    stages.push_back({{"label", st.label}, {"t0", to_json(st.t0)}, {"t1", to_json(st.t1)}});
  j["stages"] = stages;
  j["provenance"] = provenance_json(plan.provenance_up_to(bound));
  Json paths = Json::object();
  for (Index k : s.indices().indices_up_to(bound)) paths[std::to_string(k)] = path_json(s.path(k));
  j["paths"] = paths;
  Json frags = Json::array();
  for (const auto& f : plan.fragments_up_to(bound))
    frags.push_back({{"label", f.label},
                     {"space", to_json(f.block.space)},
                     {"time", Json::array({to_json(f.block.time.lo()), to_json(f.block.time.hi())})},
                     {"min_index", f.min_index},
                     {"single_index", f.single_index}});
  j["fragments"] = frags;
  return j;
}

LoadedPlan plan_from_json(const Json& j) {
  try {
    if (j.value("schema", std::string()) != "cube-shuffle/plan/1") throw IoError("not a cube-shuffle plan file");
    const std::size_t n = j.at("n").get<std::size_t>();
    std::map<Index, CubePath> paths;
    std::vector<Index> members;
    std::vector<Cube> src, tgt;
    for (const auto& [key, value] : j.at("paths").items()) {
      const Index k = std::stoull(key);
      paths.emplace(k, path_from_json(value));
    }
    for (const auto& [k, p] : paths) {
      members.push_back(k);
      src.push_back(p.start());
      tgt.push_back(p.end());
      if (p.start().dim() != n) throw IoError("path " + std::to_string(k) + " has the wrong dimension");
    }
    std::vector<StageNote> stages;
    for (const auto& st : j.at("stages"))
      stages.push_back({st.at("label").get<std::string>(), rational_from_json(st.at("t0")), rational_from_json(st.at("t1"))});
    std::vector<ProvenanceEntry> prov;
    for (const auto& e : j.at("provenance")) prov.push_back({e.at("lemma").get<std::string>(), e.value("params", Json())});
    auto source = NDomain::finite(n, members, src);
    auto target = NDomain::finite(n, members, tgt);
    std::vector<Index> fixed;
    for (Index k : j.at("fixed").get<std::vector<Index>>())
      if (paths.count(k)) fixed.push_back(k);
    return LoadedPlan{CubeSchedule::from_paths(source, target, std::move(paths), fixed, stages), prov, stages,
                      j.at("materialized_bound").get<Index>(), j.value("complete", true)};
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed plan file: ") + e.what());
  }
}

ShufflePlan plan_for_bound(const LoadedPlan& loaded, Index bound) {
  if (loaded.complete || bound <= loaded.materialized_bound) {
    ShufflePlan p{loaded.schedule, loaded.provenance, nullptr, nullptr, nullptr};
    return p;
  }
  return replay(loaded.provenance);
}

std::string index_color(Index k) {
  // golden-angle hue walk
  const double hue = std::fmod(static_cast<double>(k) * 137.50776, 360.0);
  char buf[32];
  std::snprintf(buf, sizeof buf, "hsl(%.0f,65%%,55%%)", hue);
  return buf;
}

Frame frame_at(const CubeSchedule& schedule, const Rational& t, Index bound) {
  if (schedule.dim() != 2) throw IoError("rendering supports n = 2 only");
  Frame f{t, {}};
  for (Index k : schedule.indices().indices_up_to(bound)) f.rectangles.push_back({k, schedule.path(k).at(t), index_color(k)});
  return f;
}

std::string to_svg(const Frame& frame, unsigned size) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(3);
  const double s = size;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
      << size << ' ' << size << "\">\n";
  out << "<!-- t = " << frame.time.str() << " -->\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << s << "\" height=\"" << s << "\" fill=\"white\" stroke=\"black\"/>\n";
  for (const auto& r : frame.rectangles) {
    const double x0 = r.cube.axis(0).lo().to_double() * s;
    const double x1 = r.cube.axis(0).hi().to_double() * s;
    const double y0 = r.cube.axis(1).lo().to_double() * s;
    const double y1 = r.cube.axis(1).hi().to_double() * s;
    // y axis points up in I^2
    out << "<rect data-index=\"" << r.index << "\" x=\"" << x0 << "\" y=\"" << (s - y1) << "\" width=\"" << (x1 - x0)
        << "\" height=\"" << (y1 - y0) << "\" fill=\"" << r.color << "\" fill-opacity=\"0.7\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::vector<Rational> parse_times(const std::string& list) {
  std::vector<Rational> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    Rational t;
    try {
      t = rational_from_json(Json(item));
    } catch (const std::exception&) {
      throw IoError("bad time '" + item + "'");
    }
    if (t.sign() < 0 || t > Rational(1)) throw IoError("time " + item + " outside [0,1]");
    out.push_back(t);
  }
  if (out.empty()) throw IoError("no times given");
  return out;
}

}  // namespace cubeshuffle
