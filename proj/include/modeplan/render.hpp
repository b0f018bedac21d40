#pragma once

#include "modeplan/scene.hpp"
#include "modeplan/trajectory.hpp"

#include <string>
#include <vector>

namespace modeplan {

/// One SVG document per `every` records: environment, object outline, fingers, contact normals and labels.
/// Throws TrajectoryFormatError when a contact point lies off the object boundary.
std::vector<std::string> render_svg_frames(const Scene& scene, const Trajectory& traj, int every);

/// Writes frames as frame_0000.svg, ... into `dir`; returns the number written.
int write_svg_frames(const Scene& scene, const Trajectory& traj, int every, const std::string& dir);

}  // namespace modeplan
