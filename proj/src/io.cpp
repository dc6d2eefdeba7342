#include "nmq/io.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nmq/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian");

namespace nmq {

const char* code_version() { return "nmq 0.1.0"; }

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, int line) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ParseError("line " + std::to_string(line) + ": bad numeric value '" + v + "'");
  return x;
}

long long parse_int(const std::string& v, int line) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ParseError("line " + std::to_string(line) + ": bad integer value '" + v + "'");
  return x;
}

}  // namespace

SimConfig parse_config_text(const std::string& text) {
  SimConfig cfg;
  const std::set<std::string> known{"gamma", "L",  "theta", "kappa",      "nu",
                                    "xi",    "lambda", "n", "dt",         "T",
                                    "N",     "M",  "seed",  "output_dir", "snapshot_every",
                                    "record_every", "dim"};
  const std::set<std::string> required{"gamma", "L",  "theta", "kappa", "nu",
                                       "lambda", "n", "dt",    "T"};
  std::set<std::string> seen;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (!known.count(key))
      throw ParseError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw ParseError("line " + std::to_string(line) + ": duplicate key '" + key + "'");

    if (key == "gamma") cfg.gamma = parse_double(val, line);
    else if (key == "L") cfg.L = parse_double(val, line);
    else if (key == "theta") cfg.theta = parse_double(val, line);
    else if (key == "kappa") cfg.kappa = parse_double(val, line);
    else if (key == "nu") cfg.nu = parse_double(val, line);
    else if (key == "xi") cfg.xi = parse_double(val, line);
    else if (key == "lambda") cfg.Lambda = parse_double(val, line);
    else if (key == "n") cfg.n = static_cast<int>(parse_int(val, line));
    else if (key == "dt") cfg.dt = parse_double(val, line);
    else if (key == "T") cfg.T = parse_double(val, line);
    else if (key == "N") cfg.N = static_cast<int>(parse_int(val, line));
    else if (key == "M") cfg.M = static_cast<int>(parse_int(val, line));
    else if (key == "seed") cfg.seed = static_cast<unsigned long long>(parse_int(val, line));
    else if (key == "output_dir") cfg.output_dir = val;
    else if (key == "snapshot_every") cfg.snapshot_every = static_cast<int>(parse_int(val, line));
    else if (key == "record_every") cfg.record_every = static_cast<int>(parse_int(val, line));
    else if (key == "dim") cfg.dim = static_cast<int>(parse_int(val, line));
  }
  for (const auto& k : required)
    if (!seen.count(k)) throw ParseError("missing required key '" + k + "'");
  cfg.validate();
  return cfg;
}

SimConfig parse_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// snapshots

namespace {

template <typename T>
void put(std::string& buf, const T& v) {
  const char* p = reinterpret_cast<const char*>(&v);
  buf.append(p, sizeof(T));
}

template <typename T>
T take(const std::string& buf, std::size_t& off) {
  if (off + sizeof(T) > buf.size()) throw CorruptFile("snapshot truncated");
  T v;
  std::memcpy(&v, buf.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace

void write_snapshot(const std::string& path, const Snapshot& s) {
  std::string buf;
  buf.append("NMQ1", 4);
  put<std::uint8_t>(buf, static_cast<std::uint8_t>(s.dim));
  for (int a = 0; a < s.dim; ++a) put<std::uint32_t>(buf, static_cast<std::uint32_t>(s.n));
  put<std::uint8_t>(buf, static_cast<std::uint8_t>(s.channels));
  put<double>(buf, s.Lambda);
  put<double>(buf, s.t);
  const std::size_t payload_off = buf.size();
  buf.append(reinterpret_cast<const char*>(s.data.data()), s.data.size() * sizeof(double));
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(buf.data() + payload_off),
                         static_cast<uInt>(buf.size() - payload_off));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(crc));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CorruptFile("cannot open '" + path + "' for writing");
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw CorruptFile("short write to '" + path + "'");
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CorruptFile("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string buf = ss.str();
  if (buf.size() < 4 || buf.compare(0, 4, "NMQ1") != 0)
    throw CorruptFile("bad magic in '" + path + "'");
  std::size_t off = 4;
  Snapshot s;
  s.dim = take<std::uint8_t>(buf, off);
  if (s.dim != 2 && s.dim != 3) throw CorruptFile("bad dim in '" + path + "'");
  std::uint32_t n0 = 0;
  for (int a = 0; a < s.dim; ++a) {
    const auto na = take<std::uint32_t>(buf, off);
    if (a == 0)
      n0 = na;
    else if (na != n0)
      throw CorruptFile("anisotropic grids not supported");
  }
  s.n = static_cast<int>(n0);
  s.channels = take<std::uint8_t>(buf, off);
  s.Lambda = take<double>(buf, off);
  s.t = take<double>(buf, off);
  std::size_t np = 1;
  for (int a = 0; a < s.dim; ++a) np *= s.n;
  const std::size_t count = np * static_cast<std::size_t>(s.channels);
  if (off + count * sizeof(double) + 4 != buf.size())
    throw CorruptFile("snapshot size mismatch in '" + path + "'");
  const auto crc_stored = [&] {
    std::size_t o = buf.size() - 4;
    return take<std::uint32_t>(buf, o);
  }();
  const auto crc_actual = crc32(0L, reinterpret_cast<const Bytef*>(buf.data() + off),
                                static_cast<uInt>(count * sizeof(double)));
  if (crc_stored != static_cast<std::uint32_t>(crc_actual))
    throw CorruptFile("CRC mismatch in '" + path + "'");
  s.data.resize(count);
  std::memcpy(s.data.data(), buf.data() + off, count * sizeof(double));
  return s;
}

void write_state_snapshot(const std::string& path, const Grid& g, double t,
                          const RealField& q, const RealField& u) {
  Snapshot snap;
  snap.dim = g.dim();
  snap.n = g.n();
  snap.channels = q.channels + u.channels;
  snap.Lambda = g.lambda();
  snap.t = t;
  snap.data.resize(q.v.size() + u.v.size());
  std::memcpy(snap.data.data(), q.v.data(), q.v.size() * sizeof(double));
  std::memcpy(snap.data.data() + q.v.size(), u.v.data(), u.v.size() * sizeof(double));
  write_snapshot(path, snap);
}

template <int D>
void write_state_snapshot(const std::string& path, const Stepper<D>& st,
                          const State<D>& s) {
  RealField q, u;
  st.transformer().inverse(s.qhat, q);
  st.transformer().inverse(s.uhat, u);
  write_state_snapshot(path, st.grid(), s.t, q, u);
}

template <int D>
State<D> read_state_snapshot(const std::string& path, const Stepper<D>& st,
                             double* t_out) {
  constexpr int NC = Sym0<D>::NC;
  const Grid& g = st.grid();
  const Snapshot snap = read_snapshot(path);
  if (snap.dim != D || snap.n != g.n() || snap.Lambda != g.lambda())
    throw GridMismatch("snapshot grid (dim " + std::to_string(snap.dim) + ", n " +
                       std::to_string(snap.n) + ") does not match the run grid");
  if (snap.channels != NC + D)
    throw GridMismatch("snapshot has " + std::to_string(snap.channels) +
                       " channels, expected " + std::to_string(NC + D));
  RealField q(g, NC), u(g, D);
  std::memcpy(q.v.data(), snap.data.data(), q.v.size() * sizeof(double));
  std::memcpy(u.v.data(), snap.data.data() + q.v.size(), u.v.size() * sizeof(double));
  State<D> s = st.make_state(q, u);
  s.t = snap.t;
  s.step = std::llround(snap.t / st.config().dt);
  if (std::fabs(s.step * st.config().dt - snap.t) > 1e-9 * std::max(1.0, snap.t))
    throw GridMismatch("snapshot time is not a step multiple of dt");
  if (t_out) *t_out = snap.t;
  return s;
}

template void write_state_snapshot<2>(const std::string&, const Stepper<2>&,
                                      const State<2>&);
template void write_state_snapshot<3>(const std::string&, const Stepper<3>&,
                                      const State<3>&);
template State<2> read_state_snapshot<2>(const std::string&, const Stepper<2>&, double*);
template State<3> read_state_snapshot<3>(const std::string&, const Stepper<3>&, double*);

// ---------------------------------------------------------------------------
// energy.csv

EnergyCsvWriter::EnergyCsvWriter(const std::string& path) : path_(path) {
  auto* f = std::fopen(path.c_str(), "w");
  if (!f) throw CorruptFile("cannot open '" + path + "' for writing");
  f_ = f;
  std::fprintf(f, "%s\n", kHeader);
  std::fflush(f);
}

EnergyCsvWriter::~EnergyCsvWriter() {
  finish();
  if (f_) std::fclose(static_cast<FILE*>(f_));
}

void EnergyCsvWriter::write_row(const EnergyRecord& r, double residual) {
  std::fprintf(static_cast<FILE*>(f_),
               "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.E,
               r.F, r.dissipation, residual, r.lambda_min, r.lambda_max, r.margin,
               r.psi_sup, r.convexity_integral);
  std::fflush(static_cast<FILE*>(f_));
}

void EnergyCsvWriter::push(const EnergyRecord& r) {
  tail_.push_back(r);
  if (tail_.size() == 3) {
    const double dEdt = (tail_[2].E - tail_[0].E) / (tail_[2].t - tail_[0].t);
    const double res =
        std::fabs(dEdt + tail_[1].dissipation) / std::max(1.0, tail_[1].dissipation);
    write_row(tail_[1], res);
    tail_.erase(tail_.begin());
  } else if (tail_.size() == 2) {
    write_row(tail_[0], 0.0);
  }
}

void EnergyCsvWriter::finish() {
  if (finished_ || !f_) return;
  finished_ = true;
  if (tail_.size() == 2) {
    const double dEdt = (tail_[1].E - tail_[0].E) / (tail_[1].t - tail_[0].t);
    const double avg = 0.5 * (tail_[0].dissipation + tail_[1].dissipation);
    write_row(tail_[1], std::fabs(dEdt + avg) / std::max(1.0, avg));
  } else if (tail_.size() == 1) {
    write_row(tail_[0], 0.0);
  }
  tail_.clear();
  std::fflush(static_cast<FILE*>(f_));
}

std::vector<EnergyRecord> read_energy_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw CorruptFile("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(f, line)) throw CorruptFile("empty energy csv");
  if (trim(line) != EnergyCsvWriter::kHeader)
    throw CorruptFile("unexpected energy.csv header");
  std::vector<EnergyRecord> out;
  while (std::getline(f, line)) {
    if (trim(line).empty()) continue;
    EnergyRecord r;
    double residual = 0;
    if (std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg", &r.t, &r.E,
                    &r.F, &r.dissipation, &residual, &r.lambda_min, &r.lambda_max,
                    &r.margin, &r.psi_sup, &r.convexity_integral) != 10)
      throw CorruptFile("bad energy.csv row: " + line);
    r.residual = residual;
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// manifest

namespace {

nlohmann::json config_to_json(const SimConfig& c) {
  return nlohmann::json{{"dim", c.dim},
                        {"gamma", c.gamma},
                        {"L", c.L},
                        {"theta", c.theta},
                        {"kappa", c.kappa},
                        {"nu", c.nu},
                        {"xi", c.xi},
                        {"lambda", c.Lambda},
                        {"n", c.n},
                        {"dt", c.dt},
                        {"T", c.T},
                        {"N", c.N},
                        {"M", c.M},
                        {"seed", c.seed},
                        {"output_dir", c.output_dir},
                        {"snapshot_every", c.snapshot_every},
                        {"record_every", c.record_every}};
}

SimConfig config_from_json(const nlohmann::json& j) {
  SimConfig c;
  c.dim = j.at("dim");
  c.gamma = j.at("gamma");
  c.L = j.at("L");
  c.theta = j.at("theta");
  c.kappa = j.at("kappa");
  c.nu = j.at("nu");
  c.xi = j.at("xi");
  c.Lambda = j.at("lambda");
  c.n = j.at("n");
  c.dt = j.at("dt");
  c.T = j.at("T");
  c.N = j.at("N");
  c.M = j.at("M");
  c.seed = j.at("seed");
  c.output_dir = j.at("output_dir");
  c.snapshot_every = j.at("snapshot_every");
  c.record_every = j.at("record_every");
  return c;
}

}  // namespace

void write_manifest(const std::string& dir, const RunManifest& m) {
  nlohmann::json j{{"config", config_to_json(m.config)},
                   {"code_version", m.code_version},
                   {"started", m.started},
                   {"finished", m.finished},
                   {"checkpoints", m.checkpoints},
                   {"exit_status", m.exit_status}};
  std::ofstream f(std::filesystem::path(dir) / "manifest.json", std::ios::trunc);
  if (!f) throw CorruptFile("cannot write manifest in '" + dir + "'");
  f << j.dump(2) << "\n";
}

RunManifest read_manifest(const std::string& dir) {
  std::ifstream f(std::filesystem::path(dir) / "manifest.json");
  if (!f) throw CorruptFile("cannot open manifest in '" + dir + "'");
  nlohmann::json j;
  f >> j;
  RunManifest m;
  m.config = config_from_json(j.at("config"));
  m.code_version = j.at("code_version");
  m.started = j.at("started");
  m.finished = j.at("finished");
  m.checkpoints = j.at("checkpoints").get<std::vector<std::string>>();
  m.exit_status = j.at("exit_status");
  return m;
}

}  // namespace nmq
