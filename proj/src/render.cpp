#include "modeplan/render.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace modeplan {

namespace {

struct View {
  double x0, y0, scale, height;
  double px(double x) const { return (x - x0) * scale; }
  double py(double y) const { return height - (y - y0) * scale; }
};

View fit(const Scene& s, const Trajectory& traj) {
  double xmin = std::min(s.bounds.x_min, s.start.x), xmax = std::max(s.bounds.x_max, s.start.x);
  double ymin = std::min(s.bounds.y_min, s.start.y), ymax = std::max(s.bounds.y_max, s.start.y);
  auto grow = [&](const Vec2& p) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  };
  for (const auto& st : traj.steps) grow(st.q.translation());
  const double pad = 0.1 * s.diagonal();
  xmin -= pad;
  ymin -= pad;
  xmax += pad;
  ymax += pad;
  const double scale = 800.0 / std::max(xmax - xmin, ymax - ymin);
  return {xmin, ymin, scale, (ymax - ymin) * scale};
}

std::string points(const View& v, const std::vector<Vec2>& pts) {
  std::string out;
  for (const Vec2& p : pts) out += fmt::format("{:.3f},{:.3f} ", v.px(p.x()), v.py(p.y()));
  if (!out.empty()) out.pop_back();
  return out;
}

void check_contacts_on_object(const Scene& scene, const Trajectory& traj) {
  const double tol = 10.0 * scene.contact_tolerance() + scene.finger_radius;
  for (std::size_t k = 0; k < traj.steps.size(); ++k) {
    const TrajectoryStep& st = traj.steps[k];
    for (const ContactRecord& c : st.contacts) {
      const double d = scene.object.boundary_distance(st.q.apply_inverse(c.p));
      if (d > tol)
        throw TrajectoryFormatError(
            fmt::format("step {}: contact point ({:.4f}, {:.4f}) is {:.4g} off the object boundary", k, c.p.x(),
                        c.p.y(), d));
    }
  }
}

}  // namespace

std::vector<std::string> render_svg_frames(const Scene& scene, const Trajectory& traj, int every) {
  check_contacts_on_object(scene, traj);
  std::vector<std::string> frames;
  if (every < 1) every = 1;
  const View v = fit(scene, traj);
  const double width = (std::max(scene.bounds.x_max, scene.start.x) - v.x0 + 0.1 * scene.diagonal()) * v.scale;
  const double arrow = 0.1 * scene.diagonal();

  std::string env;
  for (const Polygon& p : scene.environment)
    env += fmt::format("<polygon points=\"{}\" fill=\"#bbbbbb\" stroke=\"#555555\"/>\n", points(v, p.vertices()));
  const Polygon goal = scene.object.transformed(scene.goal);

  for (std::size_t k = 0; k < traj.steps.size(); k += static_cast<std::size_t>(every)) {
    const TrajectoryStep& st = traj.steps[k];
    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        width, v.height);
    s += env;
    s += fmt::format("<polygon points=\"{}\" fill=\"none\" stroke=\"#cc3333\" stroke-dasharray=\"4\"/>\n",
                     points(v, goal.vertices()));
    s += fmt::format("<polygon points=\"{}\" fill=\"#6699cc\" fill-opacity=\"0.6\" stroke=\"#224466\"/>\n",
                     points(v, scene.object.transformed(st.q).vertices()));
    for (const ContactRecord& c : st.contacts) {
      const Vec2 tip = c.p + arrow * c.n;
      const char* color = c.source == ContactSource::Manipulator ? "#228822" : "#aa5500";
      s += fmt::format("<line x1=\"{:.3f}\" y1=\"{:.3f}\" x2=\"{:.3f}\" y2=\"{:.3f}\" stroke=\"{}\"/>\n", v.px(c.p.x()),
                       v.py(c.p.y()), v.px(tip.x()), v.py(tip.y()), color);
      if (c.source == ContactSource::Manipulator) {
        s += fmt::format("<circle cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"5\" fill=\"{}\"/>\n", v.px(c.p.x()), v.py(c.p.y()),
                         color);
      }
      s += fmt::format("<text x=\"{:.3f}\" y=\"{:.3f}\" font-size=\"10\">{}</text>\n", v.px(c.p.x()) + 4,
                       v.py(c.p.y()) + 12, label_char(c.label));
    }
    s += fmt::format("<text x=\"8\" y=\"16\" font-size=\"12\">t = {:.4f}</text>\n</svg>\n", st.t);
    frames.push_back(std::move(s));
  }
  return frames;
}

int write_svg_frames(const Scene& scene, const Trajectory& traj, int every, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto frames = render_svg_frames(scene, traj, every);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::ofstream out(std::filesystem::path(dir) / fmt::format("frame_{:04d}.svg", i));
    if (!out) throw std::runtime_error("cannot write frame into " + dir);
    out << frames[i];
  }
  return static_cast<int>(frames.size());
}

}  // namespace modeplan
