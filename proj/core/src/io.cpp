#include "wph/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include "json.hpp"

#include "wph/error.hpp"

namespace wph {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

namespace {

constexpr char kFieldMagic[4] = {'P', 'H', 'K', 'F'};
constexpr char kTableMagic[4] = {'P', 'H', 'K', 'T'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open " + path + " for writing");
  }
  template <class T>
  void put(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), n); }
  void str(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void close() {
    out_.close();
    if (!out_) throw IoError("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open " + path);
  }
  template <class T>
  T get() {
    T v;
    bytes(&v, sizeof(T));
    return v;
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), n);
    if (static_cast<std::size_t>(in_.gcount()) != n) throw IoError("truncated file: " + path_);
  }
  std::string str() {
    auto n = get<std::uint32_t>();
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes in " + path_);
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
};

void check_magic(Reader& r, const char (&magic)[4]) {
  char m[4];
  r.bytes(m, 4);
  if (std::memcmp(m, magic, 4) != 0) throw IoError("bad magic in " + r.path());
  auto v = r.get<std::uint32_t>();
  if (v != kVersion) throw IoError("unsupported version " + std::to_string(v) + " in " + r.path());
}

std::ofstream open_text(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

}  // namespace

std::size_t FieldFile::count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

void write_field_file(const std::string& path, const FieldFile& f) {
  const std::size_t n = f.count();
  if ((f.dtype == DType::f64 && f.real.size() != n) ||
      (f.dtype == DType::complex128 && f.cplx_.size() != n))
    throw ConfigError("field file payload does not match dims");
  Writer w(path);
  w.bytes(kFieldMagic, 4);
  w.put(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(f.dims.size()));
  for (auto d : f.dims) w.put<std::uint64_t>(d);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(f.dtype));
  if (f.dtype == DType::f64)
    w.bytes(f.real.data(), n * sizeof(double));
  else
    w.bytes(f.cplx_.data(), n * sizeof(cplx));
  w.close();
}

FieldFile read_field_file(const std::string& path) {
  Reader r(path);
  check_magic(r, kFieldMagic);
  FieldFile f;
  auto nd = r.get<std::uint32_t>();
  if (nd == 0 || nd > 8) throw IoError("bad ndim in " + path);
  for (std::uint32_t i = 0; i < nd; ++i) f.dims.push_back(r.get<std::uint64_t>());
  auto tag = r.get<std::uint8_t>();
  if (tag > 1) throw IoError("bad dtype in " + path);
  f.dtype = static_cast<DType>(tag);
  const std::size_t n = f.count();
  if (n > (std::size_t{1} << 32)) throw IoError("implausible dims in " + path);
  if (f.dtype == DType::f64) {
    f.real.resize(n);
    r.bytes(f.real.data(), n * sizeof(double));
  } else {
    f.cplx_.resize(n);
    r.bytes(f.cplx_.data(), n * sizeof(cplx));
  }
  r.expect_end();
  return f;
}

void write_field(const std::string& path, const Field& x) {
  FieldFile f;
  f.dims = {static_cast<std::uint64_t>(x.side), static_cast<std::uint64_t>(x.side)};
  if (x.domain == Domain::space && x.max_imag() == 0.0) {
    f.dtype = DType::f64;
    f.real.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) f.real[i] = x[i].real();
  } else {
    f.dtype = DType::complex128;
    f.cplx_ = x.data;
  }
  write_field_file(path, f);
}

Field read_field(const std::string& path, Domain domain) {
  FieldFile f = read_field_file(path);
  if (f.dims.size() != 2 || f.dims[0] != f.dims[1] || !is_pow2(static_cast<long>(f.dims[0])))
    throw IoError(path + ": expected a square power-of-two 2-D field");
  Field x(static_cast<int>(f.dims[0]), domain);
  if (f.dtype == DType::f64)
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = f.real[i];
  else
    x.data = std::move(f.cplx_);
  return x;
}

void write_spectrum(const std::string& path, const std::vector<double>& P, int side) {
  if (P.size() != static_cast<std::size_t>(side) * side) throw ConfigError("spectrum size mismatch");
  FieldFile f;
  f.dims = {static_cast<std::uint64_t>(side), static_cast<std::uint64_t>(side)};
  f.real = P;
  write_field_file(path, f);
}

std::vector<double> read_spectrum(const std::string& path, int* side) {
  FieldFile f = read_field_file(path);
  if (f.dims.size() != 2 || f.dims[0] != f.dims[1] || f.dtype != DType::f64)
    throw IoError(path + ": expected a real square spectrum");
  if (side) *side = static_cast<int>(f.dims[0]);
  return f.real;
}

std::vector<Field> read_field_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir);
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".phk") names.push_back(e.path().string());
  std::sort(names.begin(), names.end());
  if (names.empty()) throw IoError("no .phk field files in " + dir);
  std::vector<Field> out;
  for (const auto& n : names) {
    out.push_back(read_field(n));
    if (out.back().side != out.front().side) throw ConfigError("mismatched grid sizes in " + dir);
  }
  return out;
}

void write_table(const std::string& path, const CovarianceTable& t) {
  Writer w(path);
  w.bytes(kTableMagic, 4);
  w.put(kVersion);
  w.put<std::int32_t>(t.side);
  w.put<std::int32_t>(t.J);
  w.put<std::int32_t>(t.Q);
  w.put<std::uint8_t>(t.group.rotations);
  w.put<std::uint8_t>(t.group.reflection);
  w.put<std::uint8_t>(t.group.sign_change);
  w.put<std::int32_t>(t.group.Q);
  w.put<std::uint8_t>(t.normalized);
  w.str(t.source);
  w.put<std::uint64_t>(t.classes.size());
  for (std::size_t i = 0; i < t.classes.size(); ++i) {
    w.put<std::int32_t>(t.classes[i].channel);
    w.put<std::int32_t>(t.classes[i].k);
    w.put(t.mean[i]);
  }
  w.put<std::uint64_t>(t.edges.size());
  for (std::size_t i = 0; i < t.edges.size(); ++i) {
    const auto& e = t.edges[i];
    for (int v : {e.a.channel, e.a.k, e.b.channel, e.b.k, e.tau.n1, e.tau.n2}) w.put<std::int32_t>(v);
    w.put(t.cov[i]);
  }
  w.put<std::uint64_t>(t.diag.size());
  for (double v : t.diag) w.put(v);
  w.close();
}

CovarianceTable read_table(const std::string& path) {
  Reader r(path);
  check_magic(r, kTableMagic);
  CovarianceTable t;
  t.side = r.get<std::int32_t>();
  t.J = r.get<std::int32_t>();
  t.Q = r.get<std::int32_t>();
  t.group.rotations = r.get<std::uint8_t>();
  t.group.reflection = r.get<std::uint8_t>();
  t.group.sign_change = r.get<std::uint8_t>();
  t.group.Q = r.get<std::int32_t>();
  t.normalized = r.get<std::uint8_t>();
  t.source = r.str();
  auto limit = [&](std::uint64_t n) {
    if (n > (1ull << 28)) throw IoError("implausible table size in " + path);
    return static_cast<std::size_t>(n);
  };
  const std::size_t nc = limit(r.get<std::uint64_t>());
  for (std::size_t i = 0; i < nc; ++i) {
    VertexClass v;
    v.channel = r.get<std::int32_t>();
    v.k = r.get<std::int32_t>();
    t.classes.push_back(v);
    t.mean.push_back(r.get<cplx>());
  }
  const std::size_t ne = limit(r.get<std::uint64_t>());
  for (std::size_t i = 0; i < ne; ++i) {
    Edge e;
    e.a.channel = r.get<std::int32_t>();
    e.a.k = r.get<std::int32_t>();
    e.b.channel = r.get<std::int32_t>();
    e.b.k = r.get<std::int32_t>();
    e.tau.n1 = r.get<std::int32_t>();
    e.tau.n2 = r.get<std::int32_t>();
    t.edges.push_back(e);
    t.cov.push_back(r.get<cplx>());
  }
  const std::size_t nd = limit(r.get<std::uint64_t>());
  for (std::size_t i = 0; i < nd; ++i) t.diag.push_back(r.get<double>());
  r.expect_end();
  return t;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_profile_csv(const std::string& path, const std::vector<ProfilePoint>& rows) {
  auto out = open_text(path);
  out << "k,j,a,value\n";
  for (const auto& p : rows) out << p.k << ',' << p.j << ',' << p.a << ',' << format_double(p.value) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

void write_report_csv(const std::string& path, const std::vector<ErrorReport>& rows) {
  auto out = open_text(path);
  out << "metric,j,q,mean,std\n";
  for (const auto& r : rows)
    out << r.metric << ',' << r.j << ',' << format_double(r.q) << ',' << format_double(r.mean) << ','
        << format_double(r.std) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

void write_loss_csv(const std::string& path, const std::vector<std::vector<double>>& losses) {
  auto out = open_text(path);
  out << "restart,iteration,loss\n";
  for (std::size_t r = 0; r < losses.size(); ++r)
    for (std::size_t i = 0; i < losses[r].size(); ++i)
      out << r << ',' << i << ',' << format_double(losses[r][i]) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

void write_table_csv(const std::string& path, const CovarianceTable& t, const WaveletBank& bank) {
  auto out = open_text(path);
  out << "k,j,a,value\n";
  for (std::size_t i = 0; i < t.edges.size(); ++i) {
    const auto& e = t.edges[i];
    if (e.a != e.b || e.tau != Offset{}) continue;
    out << e.a.k << ',' << bank.scale(e.a.channel) << ',' << bank.angle(e.a.channel) << ','
        << format_double(t.cov[i].real()) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

PgmRange export_pgm(const Field& x, const std::string& path) {
  PgmRange r{x[0].real(), x[0].real()};
  for (const auto& v : x.data) {
    r.min = std::min(r.min, v.real());
    r.max = std::max(r.max, v.real());
  }
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "P5\n" << x.side << ' ' << x.side << "\n65535\n";
    std::vector<unsigned char> buf(2 * x.size());
    const double span = r.max - r.min;
    for (std::size_t i = 0; i < x.size(); ++i) {
      unsigned v = span > 0 ? static_cast<unsigned>(std::lround((x[i].real() - r.min) / span * 65535.0))
                            : 32768u;
      buf[2 * i] = static_cast<unsigned char>(v >> 8);
      buf[2 * i + 1] = static_cast<unsigned char>(v & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
    if (!out) throw IoError("write failed: " + path);
  }
  nlohmann::json side;
  side["min"] = r.min;
  side["max"] = r.max;
  side["width"] = x.side;
  side["height"] = x.side;
  side["maxval"] = 65535;
  auto out = open_text(path + ".json");
  out << side.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path + ".json");
  return r;
}

Field import_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (!in || magic != "P5" || maxval != 65535 || w != h || !is_pow2(w))
    throw IoError(path + ": expected a square 16-bit P5 image");
  in.get();
  std::vector<unsigned char> buf(2 * static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) throw IoError("truncated image " + path);

  std::ifstream js(path + ".json");
  if (!js) throw IoError("missing sidecar " + path + ".json");
  double lo = 0, hi = 0;
  try {
    nlohmann::json side;
    js >> side;
    lo = side.at("min").get<double>();
    hi = side.at("max").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad sidecar " + path + ".json: " + e.what());
  }
  Field x(w);
  for (std::size_t i = 0; i < x.size(); ++i) {
    unsigned v = (static_cast<unsigned>(buf[2 * i]) << 8) | buf[2 * i + 1];
    x[i] = hi > lo ? lo + (hi - lo) * (v / 65535.0) : lo;
  }
  return x;
}

}  // namespace wph
