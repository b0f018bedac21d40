#pragma once

#include "modeplan/integrate.hpp"
#include "modeplan/mechanics.hpp"
#include "modeplan/modes.hpp"
#include "modeplan/scene.hpp"
#include "modeplan/trajectory.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace modeplan {

enum class Algorithm { Rrt, CompleteTree };

std::optional<Algorithm> parse_algorithm(std::string_view s);
std::string_view algorithm_name(Algorithm a);

struct PlannerConfig {
  /// Probability of drawing a uniform sample instead of the goal.
  double goal_bias = 0.5;
  /// Length weighting rotation in the metric; non-positive means diagonal / pi.
  double rotation_weight = 0.0;
  int max_nodes = 1000;
  /// Sample budget (0: unlimited).
  int max_samples = 0;
  double time_limit = 120.0;
  std::uint64_t seed = 0;
  /// Nodes whose stability margin falls below this are discarded (0 disables).
  double margin_threshold = 0.0;
  MarginStrategy margin_strategy = MarginStrategy::FanLp;
  Algorithm algorithm = Algorithm::Rrt;
  /// Integration step; non-positive means 0.02 * diagonal.
  double step = 0.0;
  int relocation_rounds = 50;
  EnumerationBackend backend = EnumerationBackend::Arrangement;

  double resolved_rotation_weight(const Scene& s) const {
    return rotation_weight > 0.0 ? rotation_weight : s.diagonal() / kPi;
  }
};

struct TreeNode {
  int id = 0;
  Pose q;
  int parent = -1;
  std::vector<FingerPlacement> fingers;
  std::vector<Contact> env_contacts;
  ContactMode edge_mode;
  IntegrationResult edge_trace;
  double margin = 0.0;
};

enum class FailureReason { Timeout, NodeBudget, SampleBudget, InvalidScene };

std::string_view failure_reason_name(FailureReason r);

struct PlanStats {
  int tree_nodes = 0;
  int path_nodes = 0;
  int modes_in_path = 0;
  int samples = 0;
  double elapsed = 0.0;
};

struct PlanResult {
  bool success = false;
  std::optional<FailureReason> failure;
  std::string message;
  Trajectory trajectory;
  PlanStats stats;
  std::vector<TreeNode> tree;
};

using Rng = std::mt19937_64;

/// Goal with probability 1 - p, otherwise uniform over the scene bounds.
Pose sample_object_config(const Scene& scene, double p, Rng& rng);

/// Index of the node closest to q (lowest id on ties).
int nearest_node(const std::vector<TreeNode>& tree, const Pose& q, double w_r);

/**
 * Relocates a random number of fingers (all unassigned fingers when any are
 * unassigned) to sampled collision-free boundary points, provided the
 * remaining contacts can hold the object. nullopt on failure.
 */
std::optional<std::vector<FingerPlacement>> change_manip_contact(const Scene& scene, const Pose& q,
                                                                 const std::vector<FingerPlacement>& fingers,
                                                                 const std::vector<Contact>& env_contacts,
                                                                 Rng& rng, const PlannerConfig& cfg);

/// One EXTEND toward q_rand under env mode m from `near`. Returns the new node (id unset).
std::optional<TreeNode> extend(const Scene& scene, const TreeNode& near, const ContactMode& m, const Pose& q_rand,
                               Rng& rng, const PlannerConfig& cfg, bool force_relocation);

PlanResult plan(const Scene& scene, const PlannerConfig& cfg);

/// Root-to-node records, with finger switches and a terminal step (a hold when possible). nullopt if none exists.
std::optional<Trajectory> extract_trajectory(const Scene& scene, const std::vector<TreeNode>& tree, int goal,
                                             double rotation_weight);

}  // namespace modeplan
