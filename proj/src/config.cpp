#include "mixfrac/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>

namespace mixfrac {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& v) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(first, last, v);
  return ec == std::errc() && p == last && !s.empty();
}

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  auto err = [&](const std::string& what) {
    throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') err("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) err("empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) err("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) err("missing key before '='");
    const std::string full = section.empty() ? key : section + "." + key;
    if (kv.entries_.count(full)) err(full + ": duplicate key (first set on line " + std::to_string(kv.entries_[full].line) + ")");
    kv.entries_[full] = Entry{trim(line.substr(eq + 1)), lineno, false};
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void KeyValueFile::fail(const std::string& key, const std::string& what) const {
  const auto it = entries_.find(key);
  const std::string where = it == entries_.end() ? origin_ : origin_ + ":" + std::to_string(it->second.line);
  throw ConfigError(where + ": " + key + ": " + what);
}

const std::string& KeyValueFile::raw(const std::string& key) {
  auto it = entries_.find(key);
  if (it == entries_.end()) fail(key, "missing required key");
  it->second.used = true;
  return it->second.value;
}

double KeyValueFile::number(const std::string& key) {
  const std::string& s = raw(key);
  double v = 0.0;
  if (!parse_double(s, v))
    fail(key, "'" + s + "' is not a plain number (units are fixed by the key name suffix)");
  return v;
}

int KeyValueFile::integer(const std::string& key) {
  const std::string& s = raw(key);
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) fail(key, "'" + s + "' is not an integer");
  return v;
}

bool KeyValueFile::boolean(const std::string& key) {
  const std::string& s = raw(key);
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  fail(key, "'" + s + "' is not a boolean (true/false)");
}

std::vector<double> KeyValueFile::numbers(const std::string& key) {
  const std::string& s = raw(key);
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    if (!parse_double(trim(item), v))
      fail(key, "'" + trim(item) + "' is not a plain number (units are fixed by the key name suffix)");
    out.push_back(v);
  }
  return out;
}

void KeyValueFile::reject_unused() const {
  for (const auto& [k, e] : entries_)
    if (!e.used) throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": " + k + ": unknown key");
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kGc = 17.0;        // N/mm
constexpr double kBulk = 2595.0;    // MPa
constexpr double kDefaultH = 0.3;     // mm

struct MaterialPreset {
  const char* name;
  double E, nu;
};
constexpr MaterialPreset kMaterials[] = {{"neohooke", 7.20, 0.49985}, {"150fit", 3.54, 0.49992}};
constexpr int kNotches[] = {6, 10, 12, 14, 18};

MaterialParams material_for(double E, double nu_nominal, double h) {
  return MaterialParams::from_E_K(E, kBulk, kGc, 0.01 * h, 2.0 * h, nu_nominal);
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (int n : kNotches)
    for (const auto& m : kMaterials)
      for (const char* hole : {"", "_nohole"})
        for (int r = 0; r <= 3; ++r)
          out.push_back("strip_notch" + std::to_string(n) + "_" + m.name + hole + "_ref" + std::to_string(r));
  return out;
}

RunConfig resolve_preset(const std::string& name) {
  static const std::regex re(R"(strip_notch(\d+)_(neohooke|150fit)(_nohole)?(?:_ref([0-3]))?)");
  std::smatch m;
  if (!std::regex_match(name, m, re)) throw ConfigError("unknown preset '" + name + "'");
  const int notch = std::stoi(m[1]);
  if (std::find(std::begin(kNotches), std::end(kNotches), notch) == std::end(kNotches))
    throw ConfigError("unknown preset '" + name + "': notch height must be 6, 10, 12, 14 or 18 mm");
  const auto& mat = m[2] == "neohooke" ? kMaterials[0] : kMaterials[1];

  RunConfig cfg;
  cfg.preset = name;
  MeshSpec& ms = cfg.run.mesh;
  ms.width = 20.0;
  ms.height = 28.0;
  if (!m[3].matched) {
    ms.hole_center = Vec2(12.0, 18.0);
    ms.hole_diameter = 8.0;
  }
  ms.notch_height = static_cast<double>(notch);
  ms.notch_length = 1.0;
  ms.target_h = kDefaultH;
  cfg.run.material = material_for(mat.E, mat.nu, kDefaultH);
  cfg.run.solver.max_refine_levels = m[4].matched ? std::stoi(m[4]) : 0;
  cfg.output_dir = name;
  return cfg;
}

RunConfig parse_run_config(KeyValueFile& kv) {
  RunConfig cfg;
  if (kv.has("preset")) cfg = resolve_preset(kv.raw("preset"));
  RunSettings& r = cfg.run;
  MeshSpec& ms = r.mesh;

  auto opt_num = [&](const std::string& k, double& v) {
    if (kv.has(k)) v = kv.number(k);
  };
  auto opt_int = [&](const std::string& k, int& v) {
    if (kv.has(k)) v = kv.integer(k);
  };
  auto opt_bool = [&](const std::string& k, bool& v) {
    if (kv.has(k)) v = kv.boolean(k);
  };
  auto choice = [&](const std::string& k, std::initializer_list<const char*> allowed) -> std::string {
    const std::string v = kv.raw(k);
    for (const char* a : allowed)
      if (v == a) return v;
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    throw ConfigError(kv.origin() + ": " + k + ": '" + v + "' is not one of " + list);
  };

  opt_num("mesh.width_mm", ms.width);
  opt_num("mesh.height_mm", ms.height);
  if (kv.has("mesh.hole_center_mm")) {
    if (kv.raw("mesh.hole_center_mm") == "none") {
      ms.hole_center.reset();
    } else {
      const auto c = kv.numbers("mesh.hole_center_mm");
      if (c.size() != 2) throw ConfigError(kv.origin() + ": mesh.hole_center_mm: expected 'x, y'");
      ms.hole_center = Vec2(c[0], c[1]);
    }
  }
  opt_num("mesh.hole_diameter_mm", ms.hole_diameter);
  if (kv.has("mesh.notch_height_mm")) {
    if (kv.raw("mesh.notch_height_mm") == "none")
      ms.notch_height.reset();
    else
      ms.notch_height = kv.number("mesh.notch_height_mm");
  }
  opt_num("mesh.notch_length_mm", ms.notch_length);
  opt_num("mesh.target_h_mm", ms.target_h);
  opt_int("mesh.ring_layers", ms.ring_layers);
  opt_num("mesh.block_half_width_mm", ms.block_half_width);
  if (kv.has("mesh.prerefine_mm")) {
    ms.prerefine_regions.clear();
    const std::string v = kv.raw("mesh.prerefine_mm");
    if (v != "none") {
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ';')) {
        std::vector<double> n;
        std::stringstream is(item);
        std::string tok;
        while (std::getline(is, tok, ',')) {
          double d = 0.0;
          if (!parse_double(trim(tok), d))
            throw ConfigError(kv.origin() + ": mesh.prerefine_mm: '" + trim(tok) + "' is not a plain number");
          n.push_back(d);
        }
        if (n.size() != 5 || n[4] != static_cast<int>(n[4]) || n[4] < 0)
          throw ConfigError(kv.origin() + ": mesh.prerefine_mm: expected 'x0, y0, x1, y1, levels' per region");
        ms.prerefine_regions.push_back({Vec2(n[0], n[1]), Vec2(n[2], n[3]), static_cast<int>(n[4])});
      }
    }
  }

  // Material: explicit Lame pair, else E with K or nu, else the preset.
  MaterialParams& mat = r.material;
  const bool has_lame = kv.has("material.mu_mpa") || kv.has("material.lambda_mpa");
  const bool has_e = kv.has("material.E_mpa"), has_k = kv.has("material.K_mpa"), has_nu = kv.has("material.nu");
  if (!cfg.preset.empty() || has_lame || has_e || has_k || has_nu) {
    double E = mat.E, K = mat.K, nu = mat.nu;
    opt_num("material.E_mpa", E);
    opt_num("material.K_mpa", K);
    opt_num("material.nu", nu);
    try {
      if (has_lame) {
        mat.mu = kv.number("material.mu_mpa");
        mat.lambda = kv.number("material.lambda_mpa");
        mat.E = has_e ? E : youngs_from_lame(mat.mu, mat.lambda);
        mat.K = has_k ? K : bulk_from_lame(mat.mu, mat.lambda);
        mat.nu = has_nu ? nu : nu_from_lame(mat.mu, mat.lambda);
      } else if (has_k || (!has_nu && !cfg.preset.empty())) {
        const MaterialParams m = MaterialParams::from_E_K(E, K, 0.0, 0.0, 0.0, has_nu || !cfg.preset.empty() ? nu : 0.0);
        mat.E = m.E, mat.K = m.K, mat.mu = m.mu, mat.lambda = m.lambda, mat.nu = m.nu;
      } else {
        const MaterialParams m = MaterialParams::from_E_nu(E, nu, 0.0, 0.0, 0.0);
        mat.E = m.E, mat.K = m.K, mat.mu = m.mu, mat.lambda = m.lambda, mat.nu = m.nu;
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(kv.origin() + ": material: " + e.what());
    }
  } else {
    throw ConfigError(kv.origin() + ": material: no preset and no elastic constants (set E_mpa with K_mpa or nu)");
  }
  if (cfg.preset.empty() && !kv.has("material.Gc_n_per_mm"))
    throw ConfigError(kv.origin() + ": material.Gc_n_per_mm: missing required key");
  opt_num("material.Gc_n_per_mm", mat.Gc);
  mat.eps = 2.0 * ms.target_h;
  mat.kappa = 0.01 * ms.target_h;
  opt_num("material.eps_mm", mat.eps);
  opt_num("material.kappa", mat.kappa);

  ModelOptions& mo = r.model;
  if (kv.has("model.formulation"))
    mo.formulation = choice("model.formulation", {"mixed", "classical"}) == "mixed" ? Formulation::mixed
                                                                                    : Formulation::classical;
  if (kv.has("model.crack_energy")) mo.crack = parse_crack_energy(choice("model.crack_energy", {"wu", "at1", "at2"}));
  if (kv.has("model.split")) mo.split = parse_split(choice("model.split", {"amor", "none"}));
  if (kv.has("model.positive_part"))
    mo.split_options.positive_part = choice("model.positive_part", {"spectral", "componentwise"}) == "spectral"
                                         ? PositivePart::spectral
                                         : PositivePart::componentwise;
  opt_num("model.deviator_factor", mo.split_options.deviator_factor);
  opt_bool("model.compressive_deviator", mo.split_options.compressive_deviator);

  SolverConfig& sc = r.solver;
  opt_num("solver.dt_s", sc.dt);
  opt_num("solver.newton_rel_tol", sc.newton_rel_tol);
  opt_num("solver.newton_abs_tol", sc.newton_abs_tol);
  opt_int("solver.max_newton_iters", sc.max_newton_iters);
  opt_int("solver.max_active_set_iters", sc.max_active_set_iters);
  opt_num("solver.complementarity_tol", sc.complementarity_tol);
  opt_num("solver.active_set_c_factor", sc.active_set_c_factor);
  opt_num("solver.refine_threshold", sc.refine_threshold);
  opt_int("solver.max_refine_levels", sc.max_refine_levels);
  opt_int("solver.max_halvings", sc.max_halvings);
  opt_bool("solver.line_search", sc.line_search);
  opt_bool("solver.extrapolate_predictor", sc.extrapolate_predictor);
  if (kv.has("solver.linear_solver"))
    sc.linear_solver = choice("solver.linear_solver", {"direct", "iterative"}) == "direct"
                           ? LinearSolverKind::direct_sparse
                           : LinearSolverKind::iterative_block;
  if (kv.has("solver.assembly"))
    sc.assembly_mode =
        choice("solver.assembly", {"parallel", "serial"}) == "parallel" ? ExecutionMode::parallel : ExecutionMode::serial;
  opt_int("solver.verbosity", sc.verbosity);

  opt_num("load.speed_mm_per_s", r.load.speed_mm_per_s);
  opt_bool("load.notch_phase_field", r.load.notch_phase_field);
  opt_bool("load.clamp_horizontal", r.load.clamp_horizontal);
  opt_num("load.t_end_s", r.t_end);
  opt_num("load.failure_force_fraction", r.failure_force_fraction);
  opt_bool("load.stop_on_failure", r.stop_on_failure);

  opt_num("qoi.thickness_mm", r.qoi.thickness_mm);
  opt_num("qoi.crack_threshold", r.qoi.crack_threshold);
  if (kv.has("qoi.force_eval"))
    r.qoi.reported = choice("qoi.force_eval", {"degraded", "undegraded"}) == "degraded" ? StressEval::degraded
                                                                                        : StressEval::undegraded;

  if (kv.has("output.directory")) cfg.output_dir = kv.raw("output.directory");
  opt_int("output.snapshot_stride", cfg.snapshot_stride);

  kv.reject_unused();

  // Semantic checks, reported against the owning key.
  auto check = [&](bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(kv.origin() + ": " + key + ": " + what);
  };
  check(ms.width > 0.0, "mesh.width_mm", "must be positive");
  check(ms.height > 0.0, "mesh.height_mm", "must be positive");
  check(ms.target_h > 0.0, "mesh.target_h_mm", "must be positive");
  check(mat.Gc > 0.0, "material.Gc_n_per_mm", "must be positive");
  check(mat.eps > 0.0, "material.eps_mm", "must be positive");
  check(mat.kappa > 0.0 && mat.kappa < 1.0, "material.kappa", "must lie in (0, 1)");
  check(sc.dt > 0.0, "solver.dt_s", "must be positive");
  check(sc.refine_threshold > 0.0 && sc.refine_threshold < 1.0, "solver.refine_threshold", "must lie in (0, 1)");
  check(sc.max_refine_levels >= 0, "solver.max_refine_levels", "must be non-negative");
  check(r.t_end > 0.0, "load.t_end_s", "must be positive");
  check(cfg.snapshot_stride >= 0, "output.snapshot_stride", "must be non-negative");
  try {
    validate(ms);
  } catch (const MeshError& e) {
    throw ConfigError(kv.origin() + ": mesh: " + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  KeyValueFile kv = KeyValueFile::load(path);
  return parse_run_config(kv);
}

std::string to_config_text(const RunConfig& cfg) {
  const RunSettings& r = cfg.run;
  const MeshSpec& ms = r.mesh;
  std::ostringstream os;
  if (!cfg.preset.empty()) os << "# resolved from preset " << cfg.preset << "\n";
  os << "[mesh]\n";
  os << "width_mm = " << fmt(ms.width) << "\n";
  os << "height_mm = " << fmt(ms.height) << "\n";
  if (ms.hole_center)
    os << "hole_center_mm = " << fmt(ms.hole_center->x()) << ", " << fmt(ms.hole_center->y()) << "\n";
  else
    os << "hole_center_mm = none\n";
  os << "hole_diameter_mm = " << fmt(ms.hole_diameter) << "\n";
  os << "notch_height_mm = " << (ms.notch_height ? fmt(*ms.notch_height) : std::string("none")) << "\n";
  os << "notch_length_mm = " << fmt(ms.notch_length) << "\n";
  os << "target_h_mm = " << fmt(ms.target_h) << "\n";
  os << "ring_layers = " << ms.ring_layers << "\n";
  os << "block_half_width_mm = " << fmt(ms.block_half_width) << "\n";
  os << "prerefine_mm = ";
  if (ms.prerefine_regions.empty()) os << "none";
  for (std::size_t i = 0; i < ms.prerefine_regions.size(); ++i) {
    const auto& p = ms.prerefine_regions[i];
    os << (i ? "; " : "") << fmt(p.lo.x()) << ", " << fmt(p.lo.y()) << ", " << fmt(p.hi.x()) << ", " << fmt(p.hi.y())
       << ", " << p.levels;
  }
  os << "\n\n[material]\n";
  const MaterialParams& m = r.material;
  os << "E_mpa = " << fmt(m.E) << "\nK_mpa = " << fmt(m.K) << "\nnu = " << fmt(m.nu) << "\nmu_mpa = " << fmt(m.mu)
     << "\nlambda_mpa = " << fmt(m.lambda) << "\nGc_n_per_mm = " << fmt(m.Gc) << "\neps_mm = " << fmt(m.eps)
     << "\nkappa = " << fmt(m.kappa) << "\n\n";
  const ModelOptions& mo = r.model;
  os << "[model]\nformulation = " << (mo.formulation == Formulation::mixed ? "mixed" : "classical")
     << "\ncrack_energy = " << to_string(mo.crack) << "\nsplit = " << to_string(mo.split) << "\npositive_part = "
     << (mo.split_options.positive_part == PositivePart::spectral ? "spectral" : "componentwise")
     << "\ndeviator_factor = " << fmt(mo.split_options.deviator_factor)
     << "\ncompressive_deviator = " << (mo.split_options.compressive_deviator ? "true" : "false") << "\n\n";
  const SolverConfig& sc = r.solver;
  os << "[solver]\ndt_s = " << fmt(sc.dt) << "\nnewton_rel_tol = " << fmt(sc.newton_rel_tol)
     << "\nnewton_abs_tol = " << fmt(sc.newton_abs_tol) << "\nmax_newton_iters = " << sc.max_newton_iters
     << "\nmax_active_set_iters = " << sc.max_active_set_iters << "\ncomplementarity_tol = "
     << fmt(sc.complementarity_tol) << "\nactive_set_c_factor = " << fmt(sc.active_set_c_factor)
     << "\nrefine_threshold = " << fmt(sc.refine_threshold) << "\nmax_refine_levels = " << sc.max_refine_levels
     << "\nmax_halvings = " << sc.max_halvings << "\nline_search = " << (sc.line_search ? "true" : "false")
     << "\nextrapolate_predictor = " << (sc.extrapolate_predictor ? "true" : "false")
     << "\nlinear_solver = " << (sc.linear_solver == LinearSolverKind::direct_sparse ? "direct" : "iterative")
     << "\nassembly = " << (sc.assembly_mode == ExecutionMode::parallel ? "parallel" : "serial")
     << "\nverbosity = " << sc.verbosity << "\n\n";
  os << "[load]\nspeed_mm_per_s = " << fmt(r.load.speed_mm_per_s)
     << "\nnotch_phase_field = " << (r.load.notch_phase_field ? "true" : "false")
     << "\nclamp_horizontal = " << (r.load.clamp_horizontal ? "true" : "false") << "\nt_end_s = " << fmt(r.t_end)
     << "\nfailure_force_fraction = " << fmt(r.failure_force_fraction)
     << "\nstop_on_failure = " << (r.stop_on_failure ? "true" : "false") << "\n\n";
  os << "[qoi]\nthickness_mm = " << fmt(r.qoi.thickness_mm) << "\ncrack_threshold = " << fmt(r.qoi.crack_threshold)
     << "\nforce_eval = " << (r.qoi.reported == StressEval::degraded ? "degraded" : "undegraded") << "\n\n";
  os << "[output]\ndirectory = " << cfg.output_dir << "\nsnapshot_stride = " << cfg.snapshot_stride << "\n";
  return os.str();
}

}  // namespace mixfrac
