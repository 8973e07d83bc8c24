#pragma once

#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "swarm/trajectory.hpp"

namespace swarm {

enum class MessageStatus { Optimistic, Committed };

struct TrajectoryMessage {
  int sender = 0;
  SplineTrajectory trajectory;
  MessageStatus status = MessageStatus::Optimistic;
  double stamp = 0.0;
  long sequence = 0;
  double radius = 0.25;

  nlohmann::json to_json() const;
  static TrajectoryMessage from_json(const nlohmann::json& j);
};

struct StoredTrajectory {
  SplineTrajectory trajectory;
  double stamp = 0.0;
  long sequence = 0;
  double radius = 0.25;
  double receipt = 0.0;
};

// Latest Optimistic and Committed entry per peer. A committed entry is only
// ever superseded by a newer committed one; a committed message clears any
// optimistic entry it supersedes (commit or retraction).
class TrajectoryStore {
 public:
  void ingest(const TrajectoryMessage& msg, double receipt_time);

  std::vector<const StoredTrajectory*> active_entries() const;
  const StoredTrajectory* committed(int peer) const;
  const StoredTrajectory* optimistic(int peer) const;
  long last_sequence(int peer) const;

 private:
  struct PeerSlots {
    std::optional<StoredTrajectory> optimistic;
    std::optional<StoredTrajectory> committed;
    long max_seq = -1;
  };
  std::map<int, PeerSlots> peers_;
};

struct ProtocolConfig {
  double delay_check_duration = 0.3;  // s
  double agent_radius = 0.25;         // m
  double check_dt = 0.05;             // s, collision sampling step
  double retry_backoff_max = 0.2;     // s, uniform retry delay on veto
};

// True iff the two trajectories stay separated by more than the radius sum
// over their common time domain, down-margined by (v_a + v_b) * dt / 2
// between samples (velocity bounds from the derivative control points).
// Disjoint domains are vacuously safe.
bool collision_check(const SplineTrajectory& a, const SplineTrajectory& b,
                     double radius_a, double radius_b, double dt);

// Candidate against every stored peer entry, both statuses.
bool check(const SplineTrajectory& candidate, double candidate_radius,
           const TrajectoryStore& store, const ProtocolConfig& config);

// Pure form of the delay-check window: the candidate survives iff it stays
// collision-free against every message that arrives within the window.
bool delay_check(const SplineTrajectory& candidate, double candidate_radius,
                 const ProtocolConfig& config, double window_start,
                 const std::vector<std::pair<double, TrajectoryMessage>>& feed);

// Two-step publication state machine for one agent. The caller drives it
// from its execution context: begin_publication broadcasts Optimistic,
// ingest feeds bus messages (vetoing the pending candidate on conflict),
// finish_publication either commits or retracts.
class ProtocolAgent {
 public:
  ProtocolAgent(int id, const ProtocolConfig& config, SplineTrajectory hover);

  int id() const { return id_; }
  const ProtocolConfig& config() const { return config_; }
  const SplineTrajectory& committed_trajectory() const { return committed_; }
  TrajectoryStore& store() { return store_; }
  const TrajectoryStore& store() const { return store_; }
  bool waiting() const { return waiting_; }
  double deadline() const { return deadline_; }

  // Initial hover commitment, broadcast before anything else.
  TrajectoryMessage initial_commit_message(double now);

  // Candidate must already pass check(). Returns the Optimistic message.
  TrajectoryMessage begin_publication(const SplineTrajectory& candidate, double now);

  void ingest(const TrajectoryMessage& msg, double now);

  struct PublicationOutcome {
    bool committed = false;
    TrajectoryMessage broadcast;  // Committed on success, retraction otherwise
    double retry_after = 0.0;     // s until replanning should retry (on veto)
  };

  // Called at the delay-check deadline; backoff_draw in [0,1) supplies the
  // randomized part of the retry delay.
  PublicationOutcome finish_publication(double now, double backoff_draw);

 private:
  int id_;
  ProtocolConfig config_;
  TrajectoryStore store_;
  SplineTrajectory committed_;
  long next_seq_ = 0;
  bool waiting_ = false;
  bool vetoed_ = false;
  int veto_peer_ = -1;
  double deadline_ = 0.0;
  SplineTrajectory pending_;
};

}  // namespace swarm
