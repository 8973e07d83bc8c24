#include "swarm/deconfliction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace swarm {

namespace {

double max_speed_bound(const SplineTrajectory& traj) {
  double vmax = 0.0;
  for (const auto& v : traj.velocity_ctrl_flat()) vmax = std::max(vmax, v.norm());
  return vmax;
}

const char* status_name(MessageStatus s) {
  return s == MessageStatus::Optimistic ? "optimistic" : "committed";
}

}  // namespace

nlohmann::json TrajectoryMessage::to_json() const {
  nlohmann::json j;
  j["sender"] = sender;
  j["status"] = status_name(status);
  j["stamp"] = stamp;
  j["seq"] = sequence;
  j["radius"] = radius;
  j["trajectory"] = trajectory.to_json();
  return j;
}

TrajectoryMessage TrajectoryMessage::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("sender") || !j.contains("status") ||
      !j.contains("seq") || !j.contains("trajectory"))
    throw std::invalid_argument("TrajectoryMessage::from_json: missing fields");
  TrajectoryMessage m;
  m.sender = j["sender"].get<int>();
  const std::string s = j["status"].get<std::string>();
  if (s == "optimistic")
    m.status = MessageStatus::Optimistic;
  else if (s == "committed")
    m.status = MessageStatus::Committed;
  else
    throw std::invalid_argument("TrajectoryMessage::from_json: bad status");
  m.stamp = j.value("stamp", 0.0);
  m.sequence = j["seq"].get<long>();
  m.radius = j.value("radius", 0.25);
  m.trajectory = SplineTrajectory::from_json(j["trajectory"]);
  return m;
}

void TrajectoryStore::ingest(const TrajectoryMessage& msg, double receipt_time) {
  auto& slot = peers_[msg.sender];
  if (msg.sequence <= slot.max_seq &&
      msg.status == MessageStatus::Optimistic)
    return;  // stale optimistic
  StoredTrajectory entry{msg.trajectory, msg.stamp, msg.sequence, msg.radius,
                         receipt_time};
  if (msg.status == MessageStatus::Committed) {
    if (!slot.committed || msg.sequence > slot.committed->sequence)
      slot.committed = std::move(entry);
    // the optimistic this commit/retraction supersedes is no longer pending
    if (slot.optimistic && slot.optimistic->sequence <= msg.sequence)
      slot.optimistic.reset();
  } else {
    if (!slot.optimistic || msg.sequence > slot.optimistic->sequence)
      slot.optimistic = std::move(entry);
  }
  slot.max_seq = std::max(slot.max_seq, msg.sequence);
}

std::vector<const StoredTrajectory*> TrajectoryStore::active_entries() const {
  std::vector<const StoredTrajectory*> out;
  for (const auto& [peer, slot] : peers_) {
    if (slot.committed) out.push_back(&*slot.committed);
    if (slot.optimistic) out.push_back(&*slot.optimistic);
  }
  return out;
}

const StoredTrajectory* TrajectoryStore::committed(int peer) const {
  auto it = peers_.find(peer);
  return (it != peers_.end() && it->second.committed) ? &*it->second.committed
                                                      : nullptr;
}

const StoredTrajectory* TrajectoryStore::optimistic(int peer) const {
  auto it = peers_.find(peer);
  return (it != peers_.end() && it->second.optimistic) ? &*it->second.optimistic
                                                       : nullptr;
}

long TrajectoryStore::last_sequence(int peer) const {
  auto it = peers_.find(peer);
  return it == peers_.end() ? -1 : it->second.max_seq;
}

bool collision_check(const SplineTrajectory& a, const SplineTrajectory& b,
                     double radius_a, double radius_b, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("collision_check: dt must be > 0");
  const double t0 = std::max(a.t_in(), b.t_in());
  const double t1 = std::min(a.t_f(), b.t_f());
  if (t0 >= t1) return true;  // disjoint domains: vacuously safe

  const double margin = 0.5 * dt * (max_speed_bound(a) + max_speed_bound(b));
  const double clearance = radius_a + radius_b;
  const int n = std::max(1, static_cast<int>(std::ceil((t1 - t0) / dt)));
  for (int k = 0; k <= n; ++k) {
    const double t = std::min(t0 + k * dt, t1);
    const double d = (a.evaluate(t).position - b.evaluate(t).position).norm();
    if (d - margin <= clearance) return false;
  }
  return true;
}

bool check(const SplineTrajectory& candidate, double candidate_radius,
           const TrajectoryStore& store, const ProtocolConfig& config) {
  for (const StoredTrajectory* entry : store.active_entries()) {
    if (!collision_check(candidate, entry->trajectory, candidate_radius,
                         entry->radius, config.check_dt))
      return false;
  }
  return true;
}

bool delay_check(const SplineTrajectory& candidate, double candidate_radius,
                 const ProtocolConfig& config, double window_start,
                 const std::vector<std::pair<double, TrajectoryMessage>>& feed) {
  const double window_end = window_start + config.delay_check_duration;
  for (const auto& [arrival, msg] : feed) {
    if (arrival < window_start || arrival > window_end) continue;
    if (!collision_check(candidate, msg.trajectory, candidate_radius, msg.radius,
                         config.check_dt))
      return false;
  }
  return true;
}

ProtocolAgent::ProtocolAgent(int id, const ProtocolConfig& config,
                             SplineTrajectory hover)
    : id_(id), config_(config), committed_(std::move(hover)), pending_(committed_) {}

TrajectoryMessage ProtocolAgent::initial_commit_message(double now) {
  TrajectoryMessage msg;
  msg.sender = id_;
  msg.trajectory = committed_;
  msg.status = MessageStatus::Committed;
  msg.stamp = now;
  msg.sequence = next_seq_++;
  msg.radius = config_.agent_radius;
  return msg;
}

TrajectoryMessage ProtocolAgent::begin_publication(const SplineTrajectory& candidate,
                                                   double now) {
  if (waiting_)
    throw std::logic_error("ProtocolAgent: publication already in progress");
  waiting_ = true;
  vetoed_ = false;
  veto_peer_ = -1;
  pending_ = candidate;
  deadline_ = now + config_.delay_check_duration;

  TrajectoryMessage msg;
  msg.sender = id_;
  msg.trajectory = candidate;
  msg.status = MessageStatus::Optimistic;
  msg.stamp = now;
  msg.sequence = next_seq_++;
  msg.radius = config_.agent_radius;
  return msg;
}

void ProtocolAgent::ingest(const TrajectoryMessage& msg, double now) {
  if (msg.sender == id_) return;
  store_.ingest(msg, now);
  if (!waiting_) return;
  // Always yield: any conflicting trajectory seen during the window vetoes
  // the pending candidate, regardless of the peer's status or id.
  if (!collision_check(pending_, msg.trajectory, config_.agent_radius, msg.radius,
                       config_.check_dt)) {
    vetoed_ = true;
    veto_peer_ = std::max(veto_peer_, msg.sender);
  }
}

ProtocolAgent::PublicationOutcome ProtocolAgent::finish_publication(
    double now, double backoff_draw) {
  if (!waiting_)
    throw std::logic_error("ProtocolAgent: no publication in progress");
  waiting_ = false;

  PublicationOutcome out;
  // Re-check against the whole store as well: a conflict that arrived
  // before the window opened must also veto.
  const bool clean = !vetoed_ && check(pending_, config_.agent_radius, store_, config_);
  if (clean) {
    committed_ = pending_;
    out.committed = true;
    out.broadcast.trajectory = committed_;
  } else {
    // Retraction: rebroadcast the still-valid previous commitment with a
    // fresh sequence number so peers drop the vetoed optimistic entry.
    out.committed = false;
    out.broadcast.trajectory = committed_;
    out.retry_after = backoff_draw * config_.retry_backoff_max;
    // Lower id yields: when tied with a higher-id peer, wait out a full
    // extra window so the peer's retry lands first.
    if (veto_peer_ > id_) out.retry_after += config_.delay_check_duration;
  }
  out.broadcast.sender = id_;
  out.broadcast.status = MessageStatus::Committed;
  out.broadcast.stamp = now;
  out.broadcast.sequence = next_seq_++;
  out.broadcast.radius = config_.agent_radius;
  return out;
}

}  // namespace swarm
