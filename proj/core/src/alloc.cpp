#include "odesys/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "odesys/errors.hpp"
#include "odesys/oracle.hpp"
#include "odesys/random.hpp"

namespace odesys::alloc {

std::string to_string(ActivityKind kind) {
  return kind == ActivityKind::towing ? "towing" : "maintenance";
}

ActivityKind parse_activity_kind(const std::string& text) {
  if (text == "towing") return ActivityKind::towing;
  if (text == "maintenance") return ActivityKind::maintenance;
  throw ValidationError("unknown activity kind '" + text + "'");
}

namespace {

std::string join_err(const std::string& what, const std::string& name) {
  return what + " ('" + name + "')";
}

}  // namespace

void AllocInstance::validate() const {
  const std::size_t q = locations.size();
  if (q == 0) throw ValidationError("instance has no locations");
  if (distance.size() != q) throw ValidationError("distance matrix must be square over locations");
  for (std::size_t i = 0; i < q; ++i) {
    if (distance[i].size() != q) throw ValidationError("distance matrix must be square over locations");
    for (std::size_t j = 0; j < q; ++j) {
      const double d = distance[i][j];
      if (!std::isfinite(d) || d < 0.0) throw ValidationError("distances must be finite and >= 0");
      if (i == j && d != 0.0) throw ValidationError("distance matrix diagonal must be zero");
    }
  }
  for (std::size_t a = 0; a < activities.size(); ++a) {
    const auto& act = activities[a];
    if (act.duration < 0) throw ValidationError(join_err("negative activity duration", act.name));
    if (act.window_lo < 0 || act.window_hi < act.window_lo) {
      throw ValidationError(join_err("start window must satisfy 0 <= lo <= hi", act.name));
    }
    if (act.kind == ActivityKind::towing) {
      if (act.start_location >= q || act.end_location >= q) {
        throw ValidationError(join_err("towing location out of range", act.name));
      }
    } else {
      if (act.locations.empty()) {
        throw ValidationError(join_err("maintenance activity needs candidate locations", act.name));
      }
      std::set<std::size_t> seen;
      for (auto l : act.locations) {
        if (l >= q || !seen.insert(l).second) {
          throw ValidationError(join_err("bad maintenance location set", act.name));
        }
      }
    }
    if (act.predecessor && (*act.predecessor >= activities.size() || *act.predecessor == a)) {
      throw ValidationError(join_err("bad predecessor", act.name));
    }
  }
  for (std::size_t a = 0; a < activities.size(); ++a) {
    std::size_t hops = 0;
    for (auto p = activities[a].predecessor; p; p = activities[*p].predecessor) {
      if (++hops > activities.size()) throw ValidationError("predecessor relation has a cycle");
    }
  }
  for (const auto& r : roles) {
    if (r.activity >= activities.size()) throw ValidationError(join_err("role parent out of range", r.name));
    std::set<std::size_t> seen;
    for (auto v : r.vessels) {
      if (v >= vessels.size() || !seen.insert(v).second) {
        throw ValidationError(join_err("bad vessel domain", r.name));
      }
    }
  }
  for (const auto& v : vessels) {
    if (v.speeds.empty() || v.speeds.size() != v.fuel_rates.size()) {
      throw ValidationError(join_err("speed and fuel tables must be non-empty and aligned", v.name));
    }
    for (std::size_t k = 0; k < v.speeds.size(); ++k) {
      if (!(v.speeds[k] > 0.0) || (k > 0 && !(v.speeds[k] > v.speeds[k - 1]))) {
        throw ValidationError(join_err("speeds must be positive and strictly increasing", v.name));
      }
      if (!(v.fuel_rates[k] >= 0.0)) throw ValidationError(join_err("negative fuel rate", v.name));
    }
    if (!(v.mobilisation_rate >= 0.0) || !(v.fuel_price >= 0.0)) {
      throw ValidationError(join_err("rates and prices must be >= 0", v.name));
    }
    if (!(v.standby_factor >= 0.0 && v.standby_factor <= 1.0)) {
      throw ValidationError(join_err("standby factor outside [0, 1]", v.name));
    }
  }
}

std::vector<std::size_t> AllocInstance::roles_of(std::size_t a) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < roles.size(); ++r) {
    if (roles[r].activity == a) out.push_back(r);
  }
  return out;
}

std::vector<std::size_t> AllocInstance::maintenance_activities() const {
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < activities.size(); ++a) {
    if (activities[a].kind == ActivityKind::maintenance) out.push_back(a);
  }
  return out;
}

std::pair<double, double> AllocInstance::speed_band() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& v : vessels) {
    lo = std::min(lo, v.speeds.front());
    hi = std::max(hi, v.speeds.back());
  }
  return {lo, hi};
}

namespace {

std::size_t maint_slot(const AllocInstance& inst, std::size_t a) {
  std::size_t slot = 0;
  for (std::size_t b = 0; b < a; ++b) {
    if (inst.activities[b].kind == ActivityKind::maintenance) ++slot;
  }
  return slot;
}

}  // namespace

Schedule Schedule::empty(const AllocInstance& inst) {
  const std::size_t R = inst.roles.size();
  Schedule s;
  s.start.assign(inst.activities.size(), 0);
  s.location.assign(inst.maintenance_activities().size(), 0);
  s.vessel.assign(R, 0);
  s.next.assign(R, std::vector<std::uint8_t>(R, 0));
  s.first.assign(R, 0);
  s.speed.assign(R, std::vector<double>(R, 0.0));
  return s;
}

std::size_t decision_length(const AllocInstance& inst) {
  const std::size_t R = inst.roles.size();
  return inst.activities.size() + inst.maintenance_activities().size() + R + 2 * R * R + R;
}

DecisionVector Schedule::to_vector() const {
  DecisionVector x;
  for (int t : start) x.push_back(t);
  for (auto l : location) x.push_back(static_cast<double>(l));
  for (auto v : vessel) x.push_back(static_cast<double>(v));
  for (const auto& row : next) for (auto b : row) x.push_back(b);
  for (auto b : first) x.push_back(b);
  for (const auto& row : speed) for (double s : row) x.push_back(s);
  return x;
}

Schedule Schedule::from_vector(const AllocInstance& inst, const DecisionVector& x) {
  if (x.size() != decision_length(inst)) {
    std::ostringstream msg;
    msg << "alloc decision vector has " << x.size() << " entries, expected "
        << decision_length(inst);
    throw SchemaError(msg.str());
  }
  Schedule s = empty(inst);
  const std::size_t R = inst.roles.size();
  std::size_t i = 0;
  auto as_index = [](double v) { return v < 0.0 ? std::numeric_limits<std::size_t>::max()
                                                : static_cast<std::size_t>(std::llround(v)); };
  for (auto& t : s.start) t = static_cast<int>(std::lround(x[i++]));
  for (auto& l : s.location) l = as_index(x[i++]);
  for (auto& v : s.vessel) v = as_index(x[i++]);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t rp = 0; rp < R; ++rp) s.next[r][rp] = x[i++] == 1.0 ? 1 : 0;
  for (auto& b : s.first) b = x[i++] == 1.0 ? 1 : 0;
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t rp = 0; rp < R; ++rp) s.speed[r][rp] = x[i++];
  return s;
}

int sailing_duration(double distance, double speed) {
  if (!(speed > 0.0)) throw DomainError("sailing speed must be positive");
  if (distance <= 0.0) return 0;
  return static_cast<int>(std::ceil(distance / (24.0 * speed) - 1e-9));
}

int sailing_duration(const AllocInstance& inst, std::size_t from, std::size_t to, double speed) {
  return sailing_duration(inst.distance.at(from).at(to), speed);
}

int transition_time(const AllocInstance& inst, const Schedule& s, std::size_t r, std::size_t rp) {
  const std::size_t a = inst.roles[r].activity;
  const std::size_t ap = inst.roles[rp].activity;
  return s.start[ap] - (s.start[a] + inst.activities[a].duration);
}

double transition_cost(const Vessel& v, int theta, double fuel, int delta) {
  const double standby = v.standby_factor * v.mobilisation_rate;
  return theta * (v.mobilisation_rate + v.fuel_price * fuel - standby) + standby * delta;
}

double fuel_rate(const Vessel& v, double speed) {
  for (std::size_t k = 0; k < v.speeds.size(); ++k) {
    if (v.speeds[k] == speed) return v.fuel_rates[k];
  }
  std::ostringstream msg;
  msg << "speed " << speed << " is not available on vessel '" << v.name << "'";
  throw DomainError(msg.str());
}

std::pair<std::size_t, std::size_t> role_locations(const AllocInstance& inst, const Schedule& s,
                                                   std::size_t r) {
  const std::size_t a = inst.roles.at(r).activity;
  const auto& act = inst.activities.at(a);
  if (act.kind == ActivityKind::towing) return {act.start_location, act.end_location};
  const std::size_t l = s.location.at(maint_slot(inst, a));
  return {l, l};
}

PerformanceVector capability(const AllocInstance& inst, const Schedule& s) {
  const std::size_t R = inst.roles.size();
  double f1 = 0.0, f2 = 0.0, f3 = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t rp = 0; rp < R; ++rp) {
      if (!s.next[r][rp]) continue;
      const auto& v = inst.vessels.at(s.vessel[r]);
      const std::size_t from = role_locations(inst, s, r).second;
      const std::size_t to = role_locations(inst, s, rp).first;
      const double speed = s.speed[r][rp];
      double fuel = 0.0;
      try {
        fuel = fuel_rate(v, speed);
      } catch (const DomainError& e) {
        throw CapabilityError(e.what());
      }
      const int theta = sailing_duration(inst, from, to, speed);
      f1 += inst.distance[from][to];
      f2 += transition_cost(v, theta, fuel, transition_time(inst, s, r, rp));
      f3 += fuel * theta;
    }
  }
  double f4 = 0.0;
  if (!inst.activities.empty()) {
    int lo = std::numeric_limits<int>::max();
    int hi = std::numeric_limits<int>::min();
    for (std::size_t a = 0; a < inst.activities.size(); ++a) {
      lo = std::min(lo, s.start[a]);
      hi = std::max(hi, s.start[a] + inst.activities[a].duration);
    }
    f4 = hi - lo;
  }
  return {f1, f2, f3, f4};
}

namespace {

std::string tag(const char* base, std::size_t i) {
  return std::string(base) + "[" + std::to_string(i) + "]";
}

std::string pair_tag(std::size_t r, std::size_t rp) {
  return "(r" + std::to_string(r) + ", r" + std::to_string(rp) + ")";
}

bool is_binary(double v) { return v == 0.0 || v == 1.0; }
bool is_integer(double v) { return std::isfinite(v) && v == std::round(v); }

}  // namespace

std::vector<ConstraintViolation> domain_violations(const AllocInstance& inst,
                                                   const DecisionVector& x) {
  std::vector<ConstraintViolation> out;
  if (x.size() != decision_length(inst)) {
    out.push_back({"g0:length", 1.0, "alloc decision vector length mismatch"});
    return out;
  }
  const std::size_t A = inst.activities.size();
  const std::size_t R = inst.roles.size();
  const auto maint = inst.maintenance_activities();
  std::size_t i = 0;
  for (std::size_t a = 0; a < A; ++a, ++i) {
    const auto& act = inst.activities[a];
    if (!is_integer(x[i])) {
      out.push_back({"g0:" + tag("x1", a), 1.0, "start time must be an integer day"});
    } else if (x[i] < act.window_lo) {
      out.push_back({"g0:" + tag("x1", a), act.window_lo - x[i], "before start window"});
    } else if (x[i] > act.window_hi) {
      out.push_back({"g0:" + tag("x1", a), x[i] - act.window_hi, "after start window"});
    }
  }
  for (std::size_t m = 0; m < maint.size(); ++m, ++i) {
    const auto& locs = inst.activities[maint[m]].locations;
    const bool ok = is_integer(x[i]) &&
                    std::find(locs.begin(), locs.end(), static_cast<std::size_t>(std::max(0.0, x[i]))) != locs.end() &&
                    x[i] >= 0.0;
    if (!ok) out.push_back({"g0:" + tag("x2", maint[m]), 1.0, "location not in candidate set"});
  }
  for (std::size_t r = 0; r < R; ++r, ++i) {
    const auto& dom = inst.roles[r].vessels;
    const bool ok = is_integer(x[i]) && x[i] >= 0.0 &&
                    std::find(dom.begin(), dom.end(), static_cast<std::size_t>(x[i])) != dom.end();
    if (!ok) out.push_back({"g0:" + tag("x3", r), 1.0, "vessel not in role domain"});
  }
  const std::size_t x4_at = i;
  for (std::size_t k = 0; k < R * R; ++k, ++i) {
    if (!is_binary(x[i])) out.push_back({"g0:x4" + pair_tag(k / R, k % R), 1.0, "not binary"});
  }
  for (std::size_t r = 0; r < R; ++r, ++i) {
    if (!is_binary(x[i])) out.push_back({"g0:" + tag("x5", r), 1.0, "not binary"});
  }
  const auto [s_lo, s_hi] = inst.speed_band();
  for (std::size_t k = 0; k < R * R; ++k, ++i) {
    const double link = x[x4_at + k];
    const double s = x[i];
    if (!std::isfinite(s)) {
      out.push_back({"g0:x6" + pair_tag(k / R, k % R), 1.0, "not finite"});
    } else if (link == 1.0 && (s < s_lo || s > s_hi)) {
      out.push_back({"g0:x6" + pair_tag(k / R, k % R), 1.0, "speed outside global band"});
    } else if (link == 0.0 && s != 0.0) {
      out.push_back({"g0:x6" + pair_tag(k / R, k % R), std::abs(s), "speed set on unsequenced pair"});
    }
  }
  return out;
}

std::vector<ConstraintViolation> check_constraints(const AllocInstance& inst, const Schedule& s) {
  std::vector<ConstraintViolation> out;
  const std::size_t R = inst.roles.size();
  const std::size_t V = inst.vessels.size();
  auto parent = [&](std::size_t r) { return inst.roles[r].activity; };

  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t rp = r + 1; rp < R; ++rp) {
      if (parent(r) == parent(rp) && s.vessel[r] == s.vessel[rp]) {
        out.push_back({"g1", 1.0, "roles " + pair_tag(r, rp) + " of one activity share a vessel"});
      }
    }
  }
  for (std::size_t a = 0; a < inst.activities.size(); ++a) {
    const auto& p = inst.activities[a].predecessor;
    if (!p) continue;
    const int gap = s.start[a] - (s.start[*p] + inst.activities[*p].duration);
    if (gap < 0) out.push_back({"g2", static_cast<double>(-gap), tag("a", a) + " starts before its predecessor ends"});
  }
  std::vector<int> out_deg(R, 0), in_deg(R, 0);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t rp = 0; rp < R; ++rp) {
      if (s.next[r][rp]) {
        ++out_deg[r];
        ++in_deg[rp];
      }
    }
  }
  for (std::size_t r = 0; r < R; ++r) {
    if (out_deg[r] > 1) out.push_back({"g3", out_deg[r] - 1.0, tag("r", r) + " has several successors"});
  }
  for (std::size_t r = 0; r < R; ++r) {
    if (in_deg[r] > 1) out.push_back({"g4", in_deg[r] - 1.0, tag("r", r) + " has several predecessors"});
  }
  for (std::size_t r = 0; r < R; ++r) {
    if (s.next[r][r]) out.push_back({"g5", 1.0, tag("r", r) + " follows itself"});
  }
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t rp = 0; rp < R; ++rp) {
      if (!s.next[r][rp]) continue;
      if (s.vessel[r] != s.vessel[rp]) {
        out.push_back({"g6", 1.0, pair_tag(r, rp) + " sequenced across vessels"});
      }
      if (r != rp && parent(r) == parent(rp)) {
        out.push_back({"g7", 1.0, pair_tag(r, rp) + " sequenced within one activity"});
      }
      const int lead = s.start[parent(rp)] - s.start[parent(r)];
      if (lead <= 0) {
        out.push_back({"g8", 1.0 - lead, pair_tag(r, rp) + " successor does not start later"});
      }
      if (s.vessel[r] == s.vessel[rp] && s.vessel[r] < V) {
        const auto& v = inst.vessels[s.vessel[r]];
        const int theta = sailing_duration(inst, role_locations(inst, s, r).second,
                                           role_locations(inst, s, rp).first, v.max_speed());
        const int slack = s.start[parent(rp)] -
                          (s.start[parent(r)] + inst.activities[parent(r)].duration + theta);
        if (slack < 0) {
          out.push_back({"g9", static_cast<double>(-slack), pair_tag(r, rp) + " insufficient travel time"});
        }
        bool listed = false;
        for (double sp : v.speeds) listed = listed || sp == s.speed[r][rp];
        if (!listed) out.push_back({"g13", 1.0, pair_tag(r, rp) + " speed not available on vessel"});
      }
    }
  }
  for (std::size_t v = 0; v < V; ++v) {
    int count = 0, sources = 0, sinks = 0, links = 0;
    for (std::size_t r = 0; r < R; ++r) {
      if (s.vessel[r] != v) continue;
      ++count;
      if (in_deg[r] == 0) ++sources;
      if (out_deg[r] == 0) ++sinks;
      for (std::size_t rp = 0; rp < R; ++rp) links += s.next[r][rp];
    }
    if (count == 0) continue;
    if (sources != 1) {
      out.push_back({"g10", std::abs(sources - 1.0), tag("v", v) + " needs exactly one sequence start"});
    }
    if (sinks != 1) {
      out.push_back({"g11", std::abs(sinks - 1.0), tag("v", v) + " needs exactly one sequence end"});
    }
    if (links != count - 1) {
      out.push_back({"g12", std::abs(links - (count - 1.0)), tag("v", v) + " roles do not form one path"});
    }
  }
  for (std::size_t r = 0; r < R; ++r) {
    if (s.first[r] != (in_deg[r] == 0 ? 1 : 0)) {
      out.push_back({"g10", 1.0, tag("x5", r) + " disagrees with the sequence start"});
    }
  }
  return out;
}

namespace {

std::size_t pick(double key, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(key * static_cast<double>(n)));
}

struct Placement {
  std::vector<std::vector<std::size_t>> sequence;  // per vessel, in placement order
};

constexpr std::size_t kMaxVesselCombos = 1u << 16;

std::vector<std::size_t> topo_order(const AllocInstance& inst, const std::vector<int>& desired,
                                    const std::vector<double>& priority) {
  const std::size_t A = inst.activities.size();
  std::vector<bool> done(A, false);
  std::vector<std::size_t> order;
  while (order.size() < A) {
    std::size_t best = A;
    for (std::size_t a = 0; a < A; ++a) {
      if (done[a]) continue;
      const auto& p = inst.activities[a].predecessor;
      if (p && !done[*p]) continue;
      if (best == A || desired[a] < desired[best] ||
          (desired[a] == desired[best] && priority[a] < priority[best])) {
        best = a;
      }
    }
    done[best] = true;
    order.push_back(best);
  }
  return order;
}

bool place(const AllocInstance& inst, const std::vector<std::size_t>& order,
           const std::vector<int>& desired, const std::vector<std::size_t>& pref, Schedule& s,
           Placement& plan) {
  plan.sequence.assign(inst.vessels.size(), {});
  for (std::size_t a : order) {
    const auto& act = inst.activities[a];
    int base = std::max(desired[a], act.window_lo);
    if (act.predecessor) {
      base = std::max(base, s.start[*act.predecessor] + inst.activities[*act.predecessor].duration);
    }
    const auto roles = inst.roles_of(a);
    if (roles.empty()) {
      if (base > act.window_hi) return false;
      s.start[a] = base;
      continue;
    }
    std::vector<std::size_t> idx(roles.size(), 0);
    std::vector<std::size_t> chosen(roles.size());
    auto advance = [&]() {
      for (std::size_t k = roles.size(); k-- > 0;) {
        if (++idx[k] < inst.roles[roles[k]].vessels.size()) return true;
        idx[k] = 0;
      }
      return false;
    };
    bool placed = false;
    std::size_t combos = 0;
    do {
      bool distinct = true;
      for (std::size_t i = 0; i < roles.size(); ++i) {
        const auto& dom = inst.roles[roles[i]].vessels;
        chosen[i] = dom[(pref[roles[i]] + idx[i]) % dom.size()];
        for (std::size_t j = 0; j < i; ++j) distinct = distinct && chosen[j] != chosen[i];
      }
      if (!distinct) continue;
      int t = base;
      for (std::size_t i = 0; i < roles.size(); ++i) {
        const auto& seq = plan.sequence[chosen[i]];
        if (seq.empty()) continue;
        const std::size_t q = seq.back();
        const std::size_t aq = inst.roles[q].activity;
        const int theta = sailing_duration(inst, role_locations(inst, s, q).second,
                                           role_locations(inst, s, roles[i]).first,
                                           inst.vessels[chosen[i]].max_speed());
        t = std::max({t, s.start[aq] + inst.activities[aq].duration + theta, s.start[aq] + 1});
      }
      if (t > act.window_hi) continue;
      s.start[a] = t;
      for (std::size_t i = 0; i < roles.size(); ++i) {
        s.vessel[roles[i]] = chosen[i];
        plan.sequence[chosen[i]].push_back(roles[i]);
      }
      placed = true;
    } while (!placed && ++combos < kMaxVesselCombos && advance());
    if (!placed) return false;
  }
  return true;
}

}  // namespace

AllocDecoder::AllocDecoder(std::shared_ptr<const AllocInstance> inst) : inst_(std::move(inst)) {
  if (!inst_) throw ValidationError("decoder needs an instance");
}

std::size_t AllocDecoder::key_count() const {
  return 2 * inst_->roles.size() + 2 * inst_->activities.size() +
         inst_->maintenance_activities().size();
}

Schedule AllocDecoder::decode_schedule(std::span<const double> keys) const {
  const auto& inst = *inst_;
  if (keys.size() != key_count()) throw SchemaError("alloc key vector has the wrong length");
  const std::size_t R = inst.roles.size();
  const std::size_t A = inst.activities.size();
  const auto maint = inst.maintenance_activities();
  const std::size_t M = maint.size();
  const std::size_t k_vessel = 0, k_start = R, k_loc = R + A, k_speed = R + A + M,
                    k_prio = 2 * R + A + M;
  for (const auto& r : inst.roles) {
    if (r.vessels.empty()) throw ConstructionError("role '" + r.name + "' has an empty vessel domain");
  }

  Schedule s = Schedule::empty(inst);
  for (std::size_t m = 0; m < M; ++m) {
    const auto& locs = inst.activities[maint[m]].locations;
    s.location[m] = locs[pick(keys[k_loc + m], locs.size())];
  }
  std::vector<int> desired(A);
  std::vector<double> priority(A);
  for (std::size_t a = 0; a < A; ++a) {
    const auto& act = inst.activities[a];
    desired[a] = act.window_lo +
                 static_cast<int>(pick(keys[k_start + a],
                                       static_cast<std::size_t>(act.window_hi - act.window_lo + 1)));
    priority[a] = keys[k_prio + a];
  }
  std::vector<std::size_t> pref(R);
  for (std::size_t r = 0; r < R; ++r) pref[r] = pick(keys[k_vessel + r], inst.roles[r].vessels.size());

  Placement plan;
  if (!place(inst, topo_order(inst, desired, priority), desired, pref, s, plan)) {
    std::vector<int> earliest(A);
    for (std::size_t a = 0; a < A; ++a) earliest[a] = inst.activities[a].window_lo;
    const std::vector<double> flat(A, 0.0);
    const std::vector<std::size_t> none(R, 0);
    if (!place(inst, topo_order(inst, earliest, flat), earliest, none, s, plan)) {
      throw ConstructionError("decoder could not fit every activity into its start window");
    }
  }

  for (std::size_t v = 0; v < inst.vessels.size(); ++v) {
    const auto& seq = plan.sequence[v];
    if (seq.empty()) continue;
    s.first[seq.front()] = 1;
    const auto& speeds = inst.vessels[v].speeds;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      s.next[seq[i]][seq[i + 1]] = 1;
      s.speed[seq[i]][seq[i + 1]] = speeds[pick(keys[k_speed + seq[i]], speeds.size())];
    }
  }
  return s;
}

DecisionVector AllocDecoder::decode(std::span<const double> keys) const {
  return decode_schedule(keys).to_vector();
}

AllocModel::AllocModel(std::shared_ptr<const AllocInstance> inst) : inst_(std::move(inst)) {
  if (!inst_) throw ValidationError("alloc model needs an instance");
  inst_->validate();
}

std::vector<ConstraintViolation> AllocModel::domain_violations(const DecisionVector& x) const {
  return alloc::domain_violations(*inst_, x);
}

PerformanceVector AllocModel::capability(const DecisionVector& x, const TimeContext&) const {
  return alloc::capability(*inst_, Schedule::from_vector(*inst_, x));
}

std::vector<ConstraintViolation> AllocModel::constraint_violations(const DecisionVector& x) const {
  return check_constraints(*inst_, Schedule::from_vector(*inst_, x));
}

Encoding AllocModel::default_encoding() const {
  return RandomKeyEncoding{std::make_shared<AllocDecoder>(inst_)};
}

AnchorReport preference_anchors(const AllocInstance& inst, std::size_t samples, std::uint64_t seed) {
  AnchorReport report;
  report.ranges.assign(4, {std::numeric_limits<double>::infinity(),
                           -std::numeric_limits<double>::infinity()});
  auto absorb = [&](const PerformanceVector& f) {
    for (std::size_t i = 0; i < 4; ++i) {
      report.ranges[i].min = std::min(report.ranges[i].min, f[i]);
      report.ranges[i].max = std::max(report.ranges[i].max, f[i]);
    }
    ++report.samples;
  };
  if (oracle::alloc_enumeration_size(inst) <= oracle::kAllocBudget) {
    for (const auto& s : oracle::enumerate_alloc_schedules(inst)) absorb(capability(inst, s));
    report.exact = true;
    if (report.samples == 0) throw ConstructionError("instance has no feasible schedule");
    return report;
  }
  auto shared = std::make_shared<const AllocInstance>(inst);
  AllocDecoder decoder(shared);
  Rng rng(seed);
  std::vector<double> keys(decoder.key_count());
  for (std::size_t n = 0; n < samples; ++n) {
    for (auto& k : keys) k = rng.uniform();
    absorb(capability(inst, decoder.decode_schedule(keys)));
  }
  return report;
}

ProblemDefinition make_problem(std::shared_ptr<const AllocModel> model,
                               const std::vector<CriterionRange>& ranges) {
  if (ranges.size() != 4) throw SchemaError("alloc needs four criterion ranges");
  ProblemDefinition p;
  p.model = std::move(model);
  for (const char* id : {"operations", "commercial"}) {
    Actor a;
    a.id = id;
    for (const auto& r : ranges) {
      const double hi = r.max > r.min ? r.max : r.min + 1.0;
      a.curves.emplace_back(PreferenceCurve::linear(r.min, hi, false));
    }
    p.actors.push_back(std::move(a));
  }
  p.weights.set({0, 1}, 0.5);
  p.weights.set({1, 3}, 0.5);
  p.validate();
  return p;
}

AllocInstance fixture_instance() {
  AllocInstance inst;
  inst.locations = {"port", "field_north", "field_south", "yard"};
  inst.distance = {
      {0, 240, 480, 480},
      {240, 0, 300, 240},
      {480, 300, 0, 240},
      {480, 240, 240, 0},
  };
  Activity tow_out{"tow_out", ActivityKind::towing, 3, 0, 3, 0, 1, {}, std::nullopt};
  Activity tow_on{"tow_on", ActivityKind::towing, 2, 1, 8, 1, 2, {}, 0};
  Activity service{"service", ActivityKind::maintenance, 4, 3, 10, 0, 0, {2, 3}, std::nullopt};
  inst.activities = {tow_out, tow_on, service};
  inst.roles = {
      {"tow_out_lead", 0, {0, 1}},
      {"tow_out_assist", 0, {0, 1}},
      {"tow_on_lead", 1, {0, 1}},
      {"service_support", 2, {0, 1}},
  };
  inst.vessels = {
      {"ahts_small", 2000.0, {8.0, 10.0}, {2.0, 3.0}, 300.0, 0.5},
      {"ahts_large", 16000.0, {10.0, 12.0}, {3.5, 5.0}, 600.0, 0.3},
  };
  inst.validate();
  return inst;
}

AllocInstance stress_instance(std::size_t vessels, std::size_t activities, std::uint64_t seed) {
  Rng rng(seed);
  AllocInstance inst;
  const std::size_t q = 8;
  std::vector<std::pair<double, double>> xy;
  for (std::size_t l = 0; l < q; ++l) {
    inst.locations.push_back("loc" + std::to_string(l));
    xy.emplace_back(rng.uniform(0.0, 1000.0), rng.uniform(0.0, 1000.0));
  }
  inst.distance.assign(q, std::vector<double>(q, 0.0));
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j < q; ++j)
      inst.distance[i][j] = std::round(std::hypot(xy[i].first - xy[j].first, xy[i].second - xy[j].second));
  for (std::size_t v = 0; v < vessels; ++v) {
    const double base = rng.uniform(8.0, 11.0);
    inst.vessels.push_back({"v" + std::to_string(v), rng.uniform(8000.0, 20000.0),
                            {std::round(base), std::round(base) + 2.0, std::round(base) + 4.0},
                            {2.0, 3.0, 4.5}, 600.0, rng.uniform(0.2, 0.6)});
  }
  const int horizon = static_cast<int>(activities * 6 / std::max<std::size_t>(1, vessels)) + 20;
  for (std::size_t a = 0; a < activities; ++a) {
    Activity act;
    act.name = "a" + std::to_string(a);
    act.duration = static_cast<int>(rng.between(1, 4));
    act.window_lo = static_cast<int>(rng.between(0, horizon));
    act.window_hi = act.window_lo + horizon;
    if (rng.uniform() < 0.7) {
      act.kind = ActivityKind::towing;
      act.start_location = rng.below(q);
      act.end_location = rng.below(q);
    } else {
      act.kind = ActivityKind::maintenance;
      act.locations = {rng.below(q / 2), q / 2 + rng.below(q / 2)};
    }
    if (a > 0 && rng.uniform() < 0.3) {
      const std::size_t p = rng.below(a);
      act.predecessor = p;
      act.window_lo = std::max(act.window_lo, inst.activities[p].window_lo);
      act.window_hi = act.window_lo + 2 * horizon;
    }
    inst.activities.push_back(act);
    const std::size_t n_roles = rng.uniform() < 0.3 ? 2 : 1;
    for (std::size_t k = 0; k < n_roles; ++k) {
      Role role;
      role.name = act.name + "_r" + std::to_string(k);
      role.activity = a;
      for (std::size_t v = 0; v < vessels; ++v) {
        if (rng.uniform() < 0.6) role.vessels.push_back(v);
      }
      while (role.vessels.size() < 2 && vessels >= 2) {
        const std::size_t v = rng.below(vessels);
        if (std::find(role.vessels.begin(), role.vessels.end(), v) == role.vessels.end()) {
          role.vessels.push_back(v);
          std::sort(role.vessels.begin(), role.vessels.end());
        }
      }
      inst.roles.push_back(role);
    }
  }
  inst.validate();
  return inst;
}

}  // namespace odesys::alloc
