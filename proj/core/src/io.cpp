#include "odesys/io.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>

#include "odesys/alloc.hpp"
#include "odesys/linear_model.hpp"
#include "odesys/windfarm.hpp"

namespace odesys::io {

namespace {

std::string format_input_error(const std::string& source, const std::string& pointer,
                               std::size_t line, std::size_t column, const std::string& message) {
  std::ostringstream out;
  out << source;
  if (line > 0) out << ':' << line << ':' << column;
  out << ": " << message;
  if (!pointer.empty()) out << " (at " << pointer << ')';
  return out.str();
}

}  // namespace

InputError::InputError(std::string source, std::string pointer, std::size_t line,
                       std::size_t column, std::string message)
    : SchemaError(format_input_error(source, pointer, line, column, message)),
      source_(std::move(source)),
      pointer_(std::move(pointer)),
      line_(line),
      column_(column),
      message_(std::move(message)) {}

// ---------------------------------------------------------------------------
// Locating pointers in raw text

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

namespace {

struct Scanner {
  const std::string& s;
  std::size_t i = 0;

  void ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool at(char c) const { return i < s.size() && s[i] == c; }

  bool string_token(std::string* out) {
    if (!at('"')) return false;
    const std::size_t start = i++;
    while (i < s.size() && s[i] != '"') {
      if (s[i] == '\\') ++i;
      ++i;
    }
    if (i >= s.size()) return false;
    ++i;
    if (out) {
      try {
        *out = Json::parse(s.substr(start, i - start)).get<std::string>();
      } catch (const Json::exception&) {
        return false;
      }
    }
    return true;
  }

  bool skip_value() {
    ws();
    if (i >= s.size()) return false;
    if (at('"')) return string_token(nullptr);
    if (at('{') || at('[')) {
      int depth = 0;
      while (i < s.size()) {
        const char c = s[i];
        if (c == '"') {
          if (!string_token(nullptr)) return false;
          continue;
        }
        if (c == '{' || c == '[') ++depth;
        if (c == '}' || c == ']') {
          if (--depth == 0) {
            ++i;
            return true;
          }
        }
        ++i;
      }
      return false;
    }
    while (i < s.size() && s[i] != ',' && s[i] != '}' && s[i] != ']' &&
           !std::isspace(static_cast<unsigned char>(s[i]))) {
      ++i;
    }
    return true;
  }

  // Moves to the value of `key` in the object at i.
  bool member(const std::string& key) {
    ++i;
    ws();
    if (at('}')) return false;
    while (true) {
      ws();
      std::string name;
      if (!string_token(&name)) return false;
      ws();
      if (!at(':')) return false;
      ++i;
      ws();
      if (name == key) return true;
      if (!skip_value()) return false;
      ws();
      if (!at(',')) return false;
      ++i;
    }
  }

  bool element(std::size_t index) {
    ++i;
    for (std::size_t k = 0; k < index; ++k) {
      if (!skip_value()) return false;
      ws();
      if (!at(',')) return false;
      ++i;
    }
    ws();
    return !at(']');
  }
};

std::vector<std::string> pointer_tokens(const std::string& pointer) {
  std::vector<std::string> out;
  if (pointer.empty()) return out;
  std::size_t pos = 1;
  while (true) {
    const std::size_t next = pointer.find('/', pos);
    std::string tok = pointer.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    std::string un;
    for (std::size_t k = 0; k < tok.size(); ++k) {
      if (tok[k] == '~' && k + 1 < tok.size()) {
        un += tok[k + 1] == '1' ? '/' : '~';
        ++k;
      } else {
        un += tok[k];
      }
    }
    out.push_back(std::move(un));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace

std::optional<std::size_t> locate_pointer(const std::string& text, const std::string& pointer) {
  Scanner sc{text};
  sc.ws();
  if (sc.i >= text.size()) return std::nullopt;
  std::size_t found = sc.i;
  for (const auto& tok : pointer_tokens(pointer)) {
    bool ok = false;
    if (sc.at('{')) {
      ok = sc.member(tok);
    } else if (sc.at('[')) {
      const bool numeric = !tok.empty() && std::all_of(tok.begin(), tok.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c));
      });
      ok = numeric && sc.element(std::stoul(tok));
    }
    if (!ok) break;
    found = sc.i;
  }
  return found;
}

void rethrow_located(const InputError& e, const std::string& text, const std::string& source) {
  std::size_t line = e.line();
  std::size_t col = e.column();
  if (line == 0) {
    if (auto off = locate_pointer(text, e.pointer())) {
      std::tie(line, col) = line_column(text, *off);
    }
  }
  throw InputError(source, e.pointer(), line, col, e.message());
}

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw InputError(source, "", line, col, msg);
  }
}

// ---------------------------------------------------------------------------
// Strict readers

namespace {

[[noreturn]] void fail(const std::string& pointer, const std::string& message) {
  throw InputError("", pointer, 0, 0, message);
}

// Runs fn, turning library validation errors into InputError at `pointer`.
template <class Fn>
auto guard(const std::string& pointer, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const InputError&) {
    throw;
  } catch (const ValidationError& e) {
    fail(pointer, e.what());
  } catch (const SchemaError& e) {
    fail(pointer, e.what());
  } catch (const DomainError& e) {
    fail(pointer, e.what());
  }
}

std::string child(const std::string& pointer, const std::string& key) {
  return pointer + "/" + escape_token(key);
}

std::string child(const std::string& pointer, std::size_t index) {
  return pointer + "/" + std::to_string(index);
}

class Obj {
 public:
  Obj(const Json& j, std::string pointer) : j_(j), ptr_(std::move(pointer)) {
    if (!j_.is_object()) fail(ptr_, "expected an object");
  }

  const Json* opt(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  const Json& req(const std::string& key) {
    const Json* v = opt(key);
    if (!v) fail(ptr_, "missing required field '" + key + "'");
    return *v;
  }
  std::string at(const std::string& key) const { return child(ptr_, key); }
  const std::string& pointer() const noexcept { return ptr_; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown field '" + it.key() + "'");
    }
  }

 private:
  const Json& j_;
  std::string ptr_;
  std::set<std::string> seen_;
};

double number(const Json& j, const std::string& pointer) {
  if (!j.is_number()) fail(pointer, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(pointer, "expected a finite number");
  return v;
}

long long integer(const Json& j, const std::string& pointer) {
  if (!j.is_number_integer()) fail(pointer, "expected an integer");
  return j.get<long long>();
}

std::size_t count(const Json& j, const std::string& pointer) {
  const long long v = integer(j, pointer);
  if (v < 0) fail(pointer, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::string text(const Json& j, const std::string& pointer) {
  if (!j.is_string()) fail(pointer, "expected a string");
  return j.get<std::string>();
}

const Json& array(const Json& j, const std::string& pointer) {
  if (!j.is_array()) fail(pointer, "expected an array");
  return j;
}

std::vector<double> numbers(const Json& j, const std::string& pointer) {
  std::vector<double> out;
  for (std::size_t i = 0; i < array(j, pointer).size(); ++i) out.push_back(number(j[i], child(pointer, i)));
  return out;
}

std::uint64_t seed_value(const Json& j, const std::string& pointer) {
  if (!j.is_number_unsigned()) fail(pointer, "expected a non-negative integer seed");
  return j.get<std::uint64_t>();
}

void check_format(Obj& o, const char* expected) {
  const auto ptr = o.at("format_version");
  const auto v = text(o.req("format_version"), ptr);
  if (v != expected) fail(ptr, "unsupported format_version '" + v + "', expected '" + expected + "'");
}

// Resolves a name against a list; fails at `pointer` if absent.
std::size_t index_of(const std::vector<std::string>& names, const std::string& name,
                     const std::string& pointer, const char* what) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  fail(pointer, std::string("unknown ") + what + " '" + name + "'");
}

Json kappa_to_json(double kappa) {
  if (std::isinf(kappa)) return "inf";
  return kappa;
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

// ---------------------------------------------------------------------------
// Curves and preference sections

CurveSpec curve_from_json(const Json& j, const std::string& pointer) {
  Obj o(j, pointer);
  CurveSpec c;
  if (const Json* d = o.opt("direction")) {
    c.direction = guard(o.at("direction"), [&] { return parse_curve_direction(text(*d, o.at("direction"))); });
  }
  const Json* bps = o.opt("breakpoints");
  const Json* anchors = o.opt("anchors");
  o.finish();
  if (bps && anchors) fail(pointer, "give either 'breakpoints' or 'anchors', not both");
  if (!bps && !anchors) fail(pointer, "missing 'breakpoints' or 'anchors'");
  if (anchors) {
    if (text(*anchors, o.at("anchors")) != "auto") fail(o.at("anchors"), "anchors must be \"auto\"");
    if (c.direction == CurveDirection::free) {
      fail(o.at("direction"), "automatic anchors need an ascending or descending curve");
    }
    return c;
  }
  const auto bp_ptr = o.at("breakpoints");
  for (std::size_t i = 0; i < array(*bps, bp_ptr).size(); ++i) {
    const auto p = child(bp_ptr, i);
    const auto pair = numbers((*bps)[i], p);
    if (pair.size() != 2) fail(p, "a breakpoint is [performance, preference]");
    c.breakpoints.push_back({pair[0], pair[1]});
  }
  guard(bp_ptr, [&] { return PreferenceCurve(c.breakpoints, c.direction); });
  return c;
}

Json curve_to_json(const CurveSpec& c) {
  Json j = Json::object();
  j["direction"] = to_string(c.direction);
  if (c.automatic()) {
    j["anchors"] = "auto";
  } else {
    Json bps = Json::array();
    for (const auto& b : c.breakpoints) bps.push_back({b.performance, b.preference});
    j["breakpoints"] = std::move(bps);
  }
  return j;
}

AffineMap affine_from_json(const Json& j, const std::string& pointer) {
  Obj o(j, pointer);
  AffineMap m;
  if (const Json* s = o.opt("scale")) m.scale = number(*s, o.at("scale"));
  if (const Json* b = o.opt("offset")) m.offset = number(*b, o.at("offset"));
  o.finish();
  if (!(m.scale > 0.0)) fail(o.at("scale"), "rescale factor must be positive");
  return m;
}

Json affine_to_json(const AffineMap& m) { return {{"scale", m.scale}, {"offset", m.offset}}; }

template <class T, class Fn>
std::map<std::string, T> keyed(const Json& j, const std::string& pointer, Fn&& read) {
  if (!j.is_object()) fail(pointer, "expected an object");
  std::map<std::string, T> out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = read(*it, child(pointer, it.key()));
  return out;
}

std::map<std::string, double> weight_map(const Json& j, const std::string& pointer) {
  return keyed<double>(j, pointer, [](const Json& v, const std::string& p) {
    const double w = number(v, p);
    if (w < 0.0) fail(p, "weights must be non-negative");
    return w;
  });
}

std::map<std::string, double> threshold_map(const Json& j, const std::string& pointer) {
  return keyed<double>(j, pointer, [](const Json& v, const std::string& p) {
    const double t = number(v, p);
    if (t < 0.0 || t > 100.0) fail(p, "thresholds lie on the 0..100 preference scale");
    return t;
  });
}

std::map<std::string, CurveSpec> curve_map(const Json& j, const std::string& pointer) {
  return keyed<CurveSpec>(j, pointer, curve_from_json);
}

std::map<std::string, AffineMap> rescale_map(const Json& j, const std::string& pointer) {
  return keyed<AffineMap>(j, pointer, affine_from_json);
}

template <class T>
Json map_to_json(const std::map<std::string, T>& m) {
  Json j = Json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

// ---------------------------------------------------------------------------
// Built-in model factories

windfarm::VesselSpec vessel_spec_from_json(const Json& j, const std::string& pointer) {
  Obj o(j, pointer);
  windfarm::VesselSpec v;
  v.name = text(o.req("name"), o.at("name"));
  v.install_rate = number(o.req("install_rate"), o.at("install_rate"));
  v.deck_capacity = number(o.req("deck_capacity"), o.at("deck_capacity"));
  v.transit_days = number(o.req("transit_days"), o.at("transit_days"));
  v.day_rate = number(o.req("day_rate"), o.at("day_rate"));
  v.emission_rate = number(o.req("emission_rate"), o.at("emission_rate"));
  v.alt_deployment_prob = number(o.req("alt_deployment_prob"), o.at("alt_deployment_prob"));
  o.finish();
  return v;
}

windfarm::WindfarmParams windfarm_params_from_json(const Json& j, const std::string& pointer) {
  Obj o(j, pointer);
  windfarm::WindfarmParams p;
  p.working_point_force = number(o.req("working_point_force"), o.at("working_point_force"));
  p.resistance_coeff = number(o.req("resistance_coeff"), o.at("resistance_coeff"));
  p.unit_cost_coeff = number(o.req("unit_cost_coeff"), o.at("unit_cost_coeff"));
  p.n_anchors = static_cast<int>(integer(o.req("n_anchors"), o.at("n_anchors")));
  const auto vptr = o.at("vessels");
  const Json& vs = array(o.req("vessels"), vptr);
  if (vs.size() != windfarm::kVesselClasses) {
    fail(vptr, "expected small, large and crane barge vessel classes in that order");
  }
  for (std::size_t i = 0; i < vs.size(); ++i) p.vessels[i] = vessel_spec_from_json(vs[i], child(vptr, i));
  o.finish();
  guard(pointer, [&] { p.validate(); });
  return p;
}

std::vector<std::size_t> name_list(const Json& j, const std::string& pointer,
                                   const std::vector<std::string>& names, const char* what) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < array(j, pointer).size(); ++i) {
    const auto p = child(pointer, i);
    out.push_back(index_of(names, text(j[i], p), p, what));
  }
  return out;
}

alloc::AllocInstance alloc_instance_from_json(const Json& j, const std::string& pointer) {
  Obj o(j, pointer);
  alloc::AllocInstance inst;
  const auto lptr = o.at("locations");
  for (std::size_t i = 0; i < array(o.req("locations"), lptr).size(); ++i) {
    inst.locations.push_back(text(o.req("locations")[i], child(lptr, i)));
  }
  const auto dptr = o.at("distance");
  for (std::size_t i = 0; i < array(o.req("distance"), dptr).size(); ++i) {
    inst.distance.push_back(numbers(o.req("distance")[i], child(dptr, i)));
  }

  const auto vptr = o.at("vessels");
  const Json& vs = array(o.req("vessels"), vptr);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    Obj v(vs[i], child(vptr, i));
    alloc::Vessel vessel;
    vessel.name = text(v.req("name"), v.at("name"));
    vessel.mobilisation_rate = number(v.req("mobilisation_rate"), v.at("mobilisation_rate"));
    vessel.speeds = numbers(v.req("speeds"), v.at("speeds"));
    vessel.fuel_rates = numbers(v.req("fuel_rates"), v.at("fuel_rates"));
    vessel.fuel_price = number(v.req("fuel_price"), v.at("fuel_price"));
    vessel.standby_factor = number(v.req("standby_factor"), v.at("standby_factor"));
    v.finish();
    inst.vessels.push_back(std::move(vessel));
  }
  std::vector<std::string> vessel_names;
  for (const auto& v : inst.vessels) vessel_names.push_back(v.name);

  const auto aptr = o.at("activities");
  const Json& as = array(o.req("activities"), aptr);
  std::vector<std::string> activity_names;
  for (std::size_t i = 0; i < as.size(); ++i) {
    Obj a(as[i], child(aptr, i));
    activity_names.push_back(text(a.req("name"), a.at("name")));
  }
  for (std::size_t i = 0; i < as.size(); ++i) {
    Obj a(as[i], child(aptr, i));
    alloc::Activity act;
    act.name = text(a.req("name"), a.at("name"));
    act.kind = guard(a.at("kind"), [&] { return alloc::parse_activity_kind(text(a.req("kind"), a.at("kind"))); });
    act.duration = static_cast<int>(integer(a.req("duration"), a.at("duration")));
    const auto wptr = a.at("window");
    const Json& w = array(a.req("window"), wptr);
    if (w.size() != 2) fail(wptr, "a window is [earliest, latest] start day");
    act.window_lo = static_cast<int>(integer(w[0], child(wptr, 0)));
    act.window_hi = static_cast<int>(integer(w[1], child(wptr, 1)));
    if (act.kind == alloc::ActivityKind::towing) {
      act.start_location = index_of(inst.locations, text(a.req("from"), a.at("from")), a.at("from"), "location");
      act.end_location = index_of(inst.locations, text(a.req("to"), a.at("to")), a.at("to"), "location");
    } else {
      act.locations = name_list(a.req("locations"), a.at("locations"), inst.locations, "location");
    }
    if (const Json* pred = a.opt("predecessor")) {
      act.predecessor = index_of(activity_names, text(*pred, a.at("predecessor")), a.at("predecessor"), "activity");
    }
    a.finish();
    inst.activities.push_back(std::move(act));
  }

  const auto rptr = o.at("roles");
  const Json& rs = array(o.req("roles"), rptr);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    Obj r(rs[i], child(rptr, i));
    alloc::Role role;
    role.name = text(r.req("name"), r.at("name"));
    role.activity = index_of(activity_names, text(r.req("activity"), r.at("activity")), r.at("activity"), "activity");
    role.vessels = name_list(r.req("vessels"), r.at("vessels"), vessel_names, "vessel");
    r.finish();
    inst.roles.push_back(std::move(role));
  }
  o.finish();
  guard(pointer, [&] { inst.validate(); });
  return inst;
}

void require_empty(const Json& feasibility) {
  Obj o(feasibility, "/feasibility");
  o.finish();
}

std::vector<CriterionRange> widen(std::vector<CriterionRange> ranges) {
  for (auto& r : ranges) {
    if (!(r.max > r.min)) r.max = r.min + 1.0;
  }
  return ranges;
}

ModelFactory windfarm_factory() {
  ModelFactory f;
  f.build = [](const Json& cap, const Json& feas, double grid_step) -> std::shared_ptr<const SystemModel> {
    auto params = windfarm_params_from_json(cap, "/capability");
    require_empty(feas);
    return std::make_shared<windfarm::WindfarmModel>(params, grid_step);
  };
  f.anchors = [](const SystemModel& model, const ProblemFile& file) {
    const auto& wf = dynamic_cast<const windfarm::WindfarmModel&>(model);
    return guard("/desirability/anchor_grid_step", [&] {
      return windfarm::performance_extrema(wf.params(), file.anchor_grid_step);
    });
  };
  return f;
}

ModelFactory alloc_factory() {
  ModelFactory f;
  f.build = [](const Json& cap, const Json& feas, double) -> std::shared_ptr<const SystemModel> {
    auto inst = std::make_shared<const alloc::AllocInstance>(alloc_instance_from_json(cap, "/capability"));
    require_empty(feas);
    return std::make_shared<alloc::AllocModel>(std::move(inst));
  };
  f.anchors = [](const SystemModel& model, const ProblemFile& file) {
    const auto& am = dynamic_cast<const alloc::AllocModel&>(model);
    return alloc::preference_anchors(am.instance(), file.anchor_samples).ranges;
  };
  return f;
}

ModelFactory custom_factory() {
  ModelFactory f;
  f.build = [](const Json& cap, const Json& feas, double) -> std::shared_ptr<const SystemModel> {
    Obj c(cap, "/capability");
    std::vector<GeneSpec> vars;
    const auto vptr = c.at("variables");
    const Json& vs = array(c.req("variables"), vptr);
    for (std::size_t i = 0; i < vs.size(); ++i) {
      Obj v(vs[i], child(vptr, i));
      GeneSpec g;
      g.name = text(v.req("name"), v.at("name"));
      const auto kind = text(v.req("kind"), v.at("kind"));
      if (kind == "integer") {
        g.kind = GeneKind::integer;
      } else if (kind == "real") {
        g.kind = GeneKind::real;
      } else {
        fail(v.at("kind"), "variable kind must be 'integer' or 'real'");
      }
      g.lower = number(v.req("lower"), v.at("lower"));
      g.upper = number(v.req("upper"), v.at("upper"));
      if (const Json* s = v.opt("step")) g.step = number(*s, v.at("step"));
      v.finish();
      vars.push_back(std::move(g));
    }
    std::vector<LinearFunction> perf;
    const auto pptr = c.at("performance");
    const Json& ps = array(c.req("performance"), pptr);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      Obj p(ps[i], child(pptr, i));
      LinearFunction fn;
      fn.name = text(p.req("name"), p.at("name"));
      fn.coefficients = numbers(p.req("coefficients"), p.at("coefficients"));
      if (const Json* k = p.opt("constant")) fn.constant = number(*k, p.at("constant"));
      p.finish();
      perf.push_back(std::move(fn));
    }
    c.finish();

    Obj fs(feas, "/feasibility");
    std::vector<LinearConstraint> cons;
    if (const Json* cs = fs.opt("constraints")) {
      const auto cptr = fs.at("constraints");
      for (std::size_t i = 0; i < array(*cs, cptr).size(); ++i) {
        Obj g((*cs)[i], child(cptr, i));
        LinearConstraint lc;
        lc.name = text(g.req("name"), g.at("name"));
        lc.coefficients = numbers(g.req("coefficients"), g.at("coefficients"));
        lc.relation = guard(g.at("relation"), [&] { return parse_relation(text(g.req("relation"), g.at("relation"))); });
        lc.rhs = number(g.req("rhs"), g.at("rhs"));
        g.finish();
        cons.push_back(std::move(lc));
      }
    }
    fs.finish();
    return guard("/capability", [&] {
      return std::make_shared<LinearModel>(std::move(vars), std::move(perf), std::move(cons));
    });
  };
  return f;
}

struct Registry {
  std::mutex mu;
  std::map<std::string, ModelFactory> factories;

  Registry() {
    factories["windfarm"] = windfarm_factory();
    factories["alloc"] = alloc_factory();
    factories["custom"] = custom_factory();
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

void register_model(const std::string& kind, ModelFactory factory) {
  if (!factory.build) throw ValidationError("model factory '" + kind + "' has no build function");
  auto& r = registry();
  std::lock_guard lock(r.mu);
  r.factories[kind] = std::move(factory);
}

const ModelFactory& model_factory(const std::string& kind) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  auto it = r.factories.find(kind);
  if (it == r.factories.end()) throw SchemaError("unknown problem_kind '" + kind + "'");
  return it->second;
}

std::vector<std::string> registered_kinds() {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  std::vector<std::string> out;
  for (const auto& [k, f] : r.factories) out.push_back(k);
  return out;
}

// ---------------------------------------------------------------------------
// Solver configuration

Json config_to_json(const GaConfig& c) {
  Json init = Json::array();
  for (const auto& x : c.initial_solutions) init.push_back(x);
  return {
      {"population_size", c.population_size},
      {"max_generations", c.max_generations},
      {"crossover_rate", c.crossover_rate},
      {"mutation_rate", c.mutation_rate},
      {"elite_fraction", c.elite_fraction},
      {"mutant_fraction", c.mutant_fraction},
      {"inheritance_prob", c.inheritance_prob},
      {"stall_generations", c.stall_generations},
      {"refset_capacity", c.refset_capacity},
      {"prune_kappa", kappa_to_json(c.prune_kappa)},
      {"max_resample", c.max_resample},
      {"threads", c.threads},
      {"initial_solutions", std::move(init)},
  };
}

GaConfig config_from_json(const Json& j, GaConfig c, const std::string& pointer) {
  Obj o(j, pointer);
  auto read_count = [&](const char* key, std::size_t& field) {
    if (const Json* v = o.opt(key)) field = count(*v, o.at(key));
  };
  auto read_number = [&](const char* key, double& field) {
    if (const Json* v = o.opt(key)) field = number(*v, o.at(key));
  };
  read_count("population_size", c.population_size);
  read_count("max_generations", c.max_generations);
  read_number("crossover_rate", c.crossover_rate);
  read_number("mutation_rate", c.mutation_rate);
  read_number("elite_fraction", c.elite_fraction);
  read_number("mutant_fraction", c.mutant_fraction);
  read_number("inheritance_prob", c.inheritance_prob);
  read_count("stall_generations", c.stall_generations);
  read_count("refset_capacity", c.refset_capacity);
  if (const Json* v = o.opt("prune_kappa")) {
    if (v->is_string() && v->get<std::string>() == "inf") {
      c.prune_kappa = std::numeric_limits<double>::infinity();
    } else {
      c.prune_kappa = number(*v, o.at("prune_kappa"));
    }
  }
  read_count("max_resample", c.max_resample);
  read_count("threads", c.threads);
  if (const Json* v = o.opt("initial_solutions")) {
    const auto p = o.at("initial_solutions");
    c.initial_solutions.clear();
    for (std::size_t i = 0; i < array(*v, p).size(); ++i) {
      c.initial_solutions.push_back(numbers((*v)[i], child(p, i)));
    }
  }
  o.finish();
  guard(pointer, [&] { c.validate(); });
  return c;
}

// ---------------------------------------------------------------------------
// Problem files

ProblemFile parse_problem(const std::string& src, const std::string& source) {
  const Json doc = parse_json(src, source);
  try {
    Obj top(doc, "");
    check_format(top, kProblemFormat);
    ProblemFile f;
    f.kind = text(top.req("problem_kind"), top.at("problem_kind"));
    const auto kinds = registered_kinds();
    index_of(kinds, f.kind, top.at("problem_kind"), "problem_kind");
    f.capability = top.req("capability");
    if (const Json* feas = top.opt("feasibility")) f.feasibility = *feas;

    Obj des(top.req("desirability"), top.at("desirability"));
    if (const Json* s = des.opt("anchor_grid_step")) {
      f.anchor_grid_step = number(*s, des.at("anchor_grid_step"));
      if (!(f.anchor_grid_step > 0.0)) fail(des.at("anchor_grid_step"), "grid step must be positive");
    }
    if (const Json* s = des.opt("anchor_samples")) {
      f.anchor_samples = count(*s, des.at("anchor_samples"));
      if (f.anchor_samples == 0) fail(des.at("anchor_samples"), "need at least one sample");
    }
    const auto aptr = des.at("actors");
    const Json& actors = array(des.req("actors"), aptr);
    if (actors.empty()) fail(aptr, "at least one actor is required");
    std::set<std::string> ids;
    for (std::size_t k = 0; k < actors.size(); ++k) {
      Obj a(actors[k], child(aptr, k));
      ActorSpec spec;
      spec.id = text(a.req("id"), a.at("id"));
      if (!ids.insert(spec.id).second) fail(a.at("id"), "duplicate actor id '" + spec.id + "'");
      spec.curves = curve_map(a.req("curves"), a.at("curves"));
      if (const Json* w = a.opt("weights")) spec.weights = weight_map(*w, a.at("weights"));
      if (const Json* r = a.opt("rescale")) spec.rescale = rescale_map(*r, a.at("rescale"));
      a.finish();
      f.actors.push_back(std::move(spec));
    }
    des.finish();

    if (const Json* acc = top.opt("acceptability")) {
      Obj o(*acc, top.at("acceptability"));
      if (const Json* t = o.opt("thresholds")) {
        f.thresholds = keyed<std::map<std::string, double>>(*t, o.at("thresholds"), threshold_map);
      }
      o.finish();
    }
    if (const Json* sol = top.opt("solvability")) {
      Obj o(*sol, top.at("solvability"));
      if (const Json* s = o.opt("solver")) f.solver = config_from_json(*s, f.solver, o.at("solver"));
      if (const Json* e = o.opt("encoding")) {
        Obj enc(*e, o.at("encoding"));
        if (const Json* g = enc.opt("grid_step")) {
          f.grid_step = number(*g, enc.at("grid_step"));
          if (f.grid_step < 0.0) fail(enc.at("grid_step"), "grid step must be non-negative");
        }
        enc.finish();
      }
      o.finish();
    }
    if (const Json* s = top.opt("seed")) f.seed = seed_value(*s, top.at("seed"));
    if (const Json* t = top.opt("time")) {
      Obj o(*t, top.at("time"));
      if (const Json* m = o.opt("mode")) {
        f.time.mode = guard(o.at("mode"), [&] { return parse_time_mode(text(*m, o.at("mode"))); });
      }
      if (const Json* h = o.opt("horizon")) f.time.horizon = number(*h, o.at("horizon"));
      o.finish();
    }
    top.finish();
    model_factory(f.kind).build(f.capability, f.feasibility, f.grid_step);
    return f;
  } catch (const InputError& e) {
    rethrow_located(e, src, source);
  }
}

Json problem_to_json(const ProblemFile& f) {
  Json actors = Json::array();
  for (const auto& a : f.actors) {
    Json curves = Json::object();
    for (const auto& [name, c] : a.curves) curves[name] = curve_to_json(c);
    Json actor = {{"id", a.id}, {"curves", std::move(curves)}, {"weights", map_to_json(a.weights)}};
    if (!a.rescale.empty()) {
      Json r = Json::object();
      for (const auto& [name, m] : a.rescale) r[name] = affine_to_json(m);
      actor["rescale"] = std::move(r);
    }
    actors.push_back(std::move(actor));
  }
  Json thresholds = Json::object();
  for (const auto& [actor, m] : f.thresholds) thresholds[actor] = map_to_json(m);
  return {
      {"format_version", kProblemFormat},
      {"problem_kind", f.kind},
      {"capability", f.capability},
      {"feasibility", f.feasibility},
      {"desirability",
       {{"anchor_grid_step", f.anchor_grid_step},
        {"anchor_samples", f.anchor_samples},
        {"actors", std::move(actors)}}},
      {"acceptability", {{"thresholds", std::move(thresholds)}}},
      {"solvability", {{"solver", config_to_json(f.solver)}, {"encoding", {{"grid_step", f.grid_step}}}}},
      {"seed", f.seed},
      {"time", {{"mode", to_string(f.time.mode)}, {"horizon", f.time.horizon}}},
  };
}

std::string serialize_problem(const ProblemFile& file) { return problem_to_json(file).dump(2) + "\n"; }

std::string problem_id(const ProblemFile& file) {
  return sha256_hex(problem_to_json(file).dump()).substr(0, 16);
}

LoadedProblem build_problem(const ProblemFile& file) {
  const auto& factory = model_factory(file.kind);
  LoadedProblem out;
  out.file = file;
  auto model = factory.build(file.capability, file.feasibility, file.grid_step);
  const auto criteria = model->criteria();

  std::optional<std::vector<CriterionRange>> ranges;
  auto auto_range = [&](std::size_t i, const std::string& pointer) {
    if (!ranges) {
      if (!factory.anchors) fail(pointer, "automatic anchors are not available for '" + file.kind + "'");
      ranges = widen(factory.anchors(*model, file));
    }
    return (*ranges)[i];
  };

  ProblemDefinition& p = out.problem;
  p.model = model;
  p.time = file.time;
  for (std::size_t k = 0; k < file.actors.size(); ++k) {
    const auto& spec = file.actors[k];
    const auto aptr = "/desirability/actors/" + std::to_string(k);
    Actor a;
    a.id = spec.id;
    a.curves.resize(criteria.size());
    for (const auto& [name, c] : spec.curves) {
      const auto cptr = aptr + "/curves/" + escape_token(name);
      const std::size_t i = index_of(criteria, name, cptr, "criterion");
      if (c.automatic()) {
        const auto r = auto_range(i, cptr);
        a.curves[i] = PreferenceCurve::linear(r.min, r.max, c.direction == CurveDirection::ascending);
      } else {
        a.curves[i] = guard(cptr, [&] { return PreferenceCurve(c.breakpoints, c.direction); });
      }
    }
    for (const auto& [name, w] : spec.weights) {
      const auto wptr = aptr + "/weights/" + escape_token(name);
      const std::size_t i = index_of(criteria, name, wptr, "criterion");
      if (!a.curves[i] && w != 0.0) fail(wptr, "weight on a criterion without a curve");
      if (a.curves[i]) p.weights.set({k, i}, w);
    }
    for (const auto& [name, m] : spec.rescale) {
      const auto rptr = aptr + "/rescale/" + escape_token(name);
      const std::size_t i = index_of(criteria, name, rptr, "criterion");
      if (!a.curves[i]) fail(rptr, "rescale on a criterion without a curve");
      p.rescale[{k, i}] = m;
    }
    p.actors.push_back(std::move(a));
  }
  std::vector<std::string> ids;
  for (const auto& a : file.actors) ids.push_back(a.id);
  for (const auto& [actor, m] : file.thresholds) {
    const auto tptr = "/acceptability/thresholds/" + escape_token(actor);
    const std::size_t k = index_of(ids, actor, tptr, "actor");
    for (const auto& [name, t] : m) {
      const auto cptr = tptr + "/" + escape_token(name);
      const std::size_t i = index_of(criteria, name, cptr, "criterion");
      if (!p.actors[k].curves[i]) fail(cptr, "threshold on a criterion without a curve");
      p.thresholds[{k, i}] = t;
    }
  }
  const auto report = validate_weights(p.weights);
  if (!report.valid) {
    std::ostringstream msg;
    msg << std::setprecision(12) << "weights must be non-negative and sum to 1, got sum " << report.sum;
    fail("/desirability/actors", msg.str());
  }
  guard("/desirability", [&] { p.validate(); });

  out.encoding = model->default_encoding();
  out.config = file.solver;
  out.config.rng_seed = file.seed;
  return out;
}

LoadedProblem load(const std::string& src, const std::string& source) {
  ProblemFile file = parse_problem(src, source);
  try {
    return build_problem(file);
  } catch (const InputError& e) {
    rethrow_located(e, src, source);
  }
}

LoadedProblem load_path(const std::string& path) {
  std::string src;
  try {
    src = read_file(path);
  } catch (const Error& e) {
    throw InputError(path, "", 0, 0, e.what());
  }
  return load(src, path);
}

// ---------------------------------------------------------------------------
// Overrides

Override parse_override(const std::string& src, const std::string& source) {
  const Json doc = parse_json(src, source);
  try {
    Obj top(doc, "");
    check_format(top, kOverrideFormat);
    Override o;
    if (const Json* w = top.opt("weights")) {
      o.weights = keyed<std::map<std::string, double>>(*w, top.at("weights"), weight_map);
    }
    if (const Json* c = top.opt("curves")) {
      o.curves = keyed<std::map<std::string, CurveSpec>>(*c, top.at("curves"), curve_map);
    }
    if (const Json* t = top.opt("thresholds")) {
      o.thresholds = keyed<std::map<std::string, double>>(*t, top.at("thresholds"), threshold_map);
    }
    if (const Json* r = top.opt("rescale")) {
      o.rescale = keyed<std::map<std::string, AffineMap>>(*r, top.at("rescale"), rescale_map);
    }
    top.finish();
    return o;
  } catch (const InputError& e) {
    rethrow_located(e, src, source);
  }
}

Json override_to_json(const Override& o) {
  Json j = {{"format_version", kOverrideFormat}};
  if (o.weights) {
    Json w = Json::object();
    for (const auto& [actor, m] : *o.weights) w[actor] = map_to_json(m);
    j["weights"] = std::move(w);
  }
  if (!o.curves.empty()) {
    Json c = Json::object();
    for (const auto& [actor, m] : o.curves) {
      for (const auto& [name, curve] : m) c[actor][name] = curve_to_json(curve);
    }
    j["curves"] = std::move(c);
  }
  if (!o.thresholds.empty()) {
    Json t = Json::object();
    for (const auto& [actor, m] : o.thresholds) t[actor] = map_to_json(m);
    j["thresholds"] = std::move(t);
  }
  if (!o.rescale.empty()) {
    Json r = Json::object();
    for (const auto& [actor, m] : o.rescale) {
      for (const auto& [name, a] : m) r[actor][name] = affine_to_json(a);
    }
    j["rescale"] = std::move(r);
  }
  return j;
}

ProblemFile apply_override(const ProblemFile& file, const Override& o) {
  ProblemFile out = file;
  std::vector<std::string> ids;
  for (const auto& a : file.actors) ids.push_back(a.id);
  auto actor = [&](const std::string& section, const std::string& id) -> ActorSpec& {
    return out.actors[index_of(ids, id, "/" + section + "/" + escape_token(id), "actor")];
  };
  if (o.weights) {
    for (const auto& [id, m] : *o.weights) actor("weights", id);
    for (auto& a : out.actors) {
      auto it = o.weights->find(a.id);
      a.weights = it == o.weights->end() ? std::map<std::string, double>{} : it->second;
    }
  }
  for (const auto& [id, m] : o.curves) {
    auto& a = actor("curves", id);
    for (const auto& [name, c] : m) a.curves[name] = c;
  }
  for (const auto& [id, m] : o.rescale) {
    auto& a = actor("rescale", id);
    for (const auto& [name, r] : m) a.rescale[name] = r;
  }
  for (const auto& [id, m] : o.thresholds) {
    actor("thresholds", id);
    for (const auto& [name, t] : m) out.thresholds[id][name] = t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Results

Json evaluation_to_json(const LoadedProblem& loaded, const CandidateEvaluation& ev) {
  const auto& problem = loaded.problem;
  const auto criteria = problem.model->criteria();
  Json f = Json::object();
  for (std::size_t i = 0; i < ev.f_values.size() && i < criteria.size(); ++i) f[criteria[i]] = ev.f_values[i];
  Json violations = Json::array();
  for (const auto& v : ev.violations) {
    Json item = {{"name", v.name}, {"margin", finite_or_null(v.margin)}};
    if (!v.detail.empty()) item["detail"] = v.detail;
    violations.push_back(std::move(item));
  }
  Json prefs = Json::object();
  const auto cols = problem.score_columns();
  for (std::size_t c = 0; c < cols.size() && c < ev.p_values.size(); ++c) {
    prefs[problem.actors[cols[c].actor].id][criteria[cols[c].criterion]] = ev.p_values[c];
  }
  Json shortfalls = Json::array();
  for (const auto& s : ev.shortfalls) {
    shortfalls.push_back({{"actor", problem.actors[s.key.actor].id},
                          {"criterion", criteria[s.key.criterion]},
                          {"preference", s.preference},
                          {"threshold", s.threshold}});
  }
  return {
      {"x", ev.x},
      {"f", std::move(f)},
      {"feasible", ev.feasible},
      {"violations", std::move(violations)},
      {"preferences", std::move(prefs)},
      {"acceptable", ev.acceptable},
      {"shortfalls", std::move(shortfalls)},
      {"clamped", ev.clamped},
  };
}

Json result_to_json(const LoadedProblem& loaded, const RunResult& r) {
  Json trace = Json::array();
  for (const auto& row : r.trace) {
    trace.push_back({{"generation", row.generation},
                     {"best_Z", finite_or_null(row.best_Z)},
                     {"mean_Z", finite_or_null(row.mean_Z)},
                     {"feasible_count", row.feasible_count}});
  }
  return {
      {"format_version", kResultFormat},
      {"problem_kind", loaded.file.kind},
      {"problem_id", problem_id(loaded.file)},
      {"seed", r.seed},
      {"config", config_to_json(loaded.config)},
      {"best_x", r.best_x},
      {"best_Z", finite_or_null(r.best_Z)},
      {"best", evaluation_to_json(loaded, r.best)},
      {"evaluations", r.evaluations},
      {"generations", r.generations},
      {"terminated_by", to_string(r.terminated_by)},
      {"trace", std::move(trace)},
  };
}

std::string serialize_result(const LoadedProblem& loaded, const RunResult& result) {
  return result_to_json(loaded, result).dump(2) + "\n";
}

Json oracle_to_json(const LoadedProblem& loaded, const oracle::EnumerationReport& rep) {
  const auto criteria = loaded.problem.model->criteria();
  Json extrema = Json::object();
  for (std::size_t i = 0; i < rep.extrema.size() && i < criteria.size(); ++i) {
    extrema[criteria[i]] = {{"min", finite_or_null(rep.extrema[i].min)},
                            {"max", finite_or_null(rep.extrema[i].max)}};
  }
  Json j = {
      {"format_version", kOracleFormat},
      {"problem_kind", loaded.file.kind},
      {"problem_id", problem_id(loaded.file)},
      {"enumerated", rep.enumerated},
      {"candidates", rep.candidates.size()},
      {"feasible_count", rep.feasible_count},
      {"acceptable_count", rep.acceptable_count},
      {"extrema", std::move(extrema)},
  };
  if (rep.best_index) {
    j["best_x"] = rep.best_x;
    j["best_Z"] = finite_or_null(rep.best_Z);
    j["best"] = evaluation_to_json(loaded, evaluate_candidate(loaded.problem, rep.best_x));
  } else {
    j["best_x"] = nullptr;
    j["best_Z"] = nullptr;
    j["best"] = nullptr;
  }
  return j;
}

std::string serialize_oracle(const LoadedProblem& loaded, const oracle::EnumerationReport& report) {
  return oracle_to_json(loaded, report).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Utilities

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) out << std::setw(2) << static_cast<int>(digest[i]);
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file '" + path + "'");
  out << content;
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace odesys::io
