#include "modeplan/trajectory.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>

namespace modeplan {

using nlohmann::ordered_json;

std::string mode_signature(const TrajectoryStep& step) {
  std::string env;
  int fingers = 0;
  for (const ContactRecord& c : step.contacts) {
    if (c.source == ContactSource::Manipulator) {
      ++fingers;
    } else {
      env += label_char(c.label);
    }
  }
  return env + "|" + std::to_string(fingers);
}

int distinct_modes(const Trajectory& traj) {
  std::set<std::string> seen;
  for (const auto& s : traj.steps) seen.insert(mode_signature(s));
  return static_cast<int>(seen.size());
}

namespace {

ordered_json vec(const Vec2& v) { return ordered_json::array({v.x(), v.y()}); }

ordered_json opt_vec(const std::optional<Vec2>& v) { return v ? vec(*v) : ordered_json(nullptr); }

Vec2 read_vec(const ordered_json& j) {
  if (!j.is_array() || j.size() != 2) throw TrajectoryFormatError("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

void write_trajectory(std::ostream& out, const Trajectory& traj) {
  for (const TrajectoryStep& s : traj.steps) {
    ordered_json r;
    r["t"] = s.t;
    r["q"] = ordered_json::array({s.q.x, s.q.y, s.q.theta});
    ordered_json cs = ordered_json::array();
    for (const ContactRecord& c : s.contacts) {
      ordered_json jc;
      jc["source"] = c.source == ContactSource::Environment ? "env" : "finger:" + std::to_string(c.finger);
      jc["p"] = vec(c.p);
      jc["n"] = vec(c.n);
      jc["mode_label"] = std::string(label_name(c.label));
      jc["lambda_n"] = c.lambda_n;
      jc["lambda_t"] = c.lambda_t;
      cs.push_back(jc);
    }
    r["contacts"] = cs;
    if (!s.switches.empty()) {
      ordered_json sw = ordered_json::array();
      for (const FingerSwitch& f : s.switches) {
        ordered_json e;
        e["finger"] = f.finger;
        e["from"] = opt_vec(f.from);
        e["to"] = opt_vec(f.to);
        sw.push_back(e);
      }
      r["event"] = {{"finger_switch", sw}};
    }
    out << r.dump() << '\n';
  }
}

Trajectory read_trajectory(std::istream& in) {
  Trajectory traj;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const ordered_json r = ordered_json::parse(line);
      TrajectoryStep s;
      s.t = r.at("t").get<double>();
      const auto& q = r.at("q");
      if (!q.is_array() || q.size() != 3) throw TrajectoryFormatError("q must have 3 entries");
      s.q = Pose(q[0].get<double>(), q[1].get<double>(), q[2].get<double>());
      for (const auto& jc : r.at("contacts")) {
        ContactRecord c;
        const std::string src = jc.at("source").get<std::string>();
        if (src == "env") {
          c.source = ContactSource::Environment;
        } else if (src.rfind("finger:", 0) == 0) {
          c.source = ContactSource::Manipulator;
          c.finger = std::stoi(src.substr(7));
        } else {
          throw TrajectoryFormatError("unknown source " + src);
        }
        c.p = read_vec(jc.at("p"));
        c.n = read_vec(jc.at("n"));
        const auto label = parse_label(jc.at("mode_label").get<std::string>());
        if (!label) throw TrajectoryFormatError("unknown mode label");
        c.label = *label;
        c.lambda_n = jc.at("lambda_n").get<double>();
        c.lambda_t = jc.at("lambda_t").get<double>();
        s.contacts.push_back(c);
      }
      if (r.contains("event")) {
        for (const auto& e : r.at("event").at("finger_switch")) {
          FingerSwitch f;
          f.finger = e.at("finger").get<int>();
          if (!e.at("from").is_null()) f.from = read_vec(e.at("from"));
          if (!e.at("to").is_null()) f.to = read_vec(e.at("to"));
          s.switches.push_back(f);
        }
      }
      traj.steps.push_back(std::move(s));
    } catch (const ordered_json::exception& e) {
      throw TrajectoryFormatError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw TrajectoryFormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return traj;
}

void write_trajectory_file(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_trajectory(out, traj);
}

Trajectory read_trajectory_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TrajectoryFormatError("cannot open " + path);
  return read_trajectory(in);
}

}  // namespace modeplan
