#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wph/covariance.hpp"
#include "wph/evaluation.hpp"
#include "wph/grid.hpp"

namespace wph {

enum class DType : std::uint8_t { f64 = 0, complex128 = 1 };

// n-dimensional array in the "PHKF" container.
struct FieldFile {
  std::vector<std::uint64_t> dims;
  DType dtype = DType::f64;
  std::vector<double> real;  // dtype f64
  std::vector<cplx> cplx_;   // dtype complex128
  std::size_t count() const;
};

void write_field_file(const std::string& path, const FieldFile& f);
FieldFile read_field_file(const std::string& path);

// Square 2-D fields. Space-domain fields with zero imaginary part are stored as f64.
void write_field(const std::string& path, const Field& x);
Field read_field(const std::string& path, Domain domain = Domain::space);

// Real spectrum in FFT bin order, stored as an f64 side x side array.
void write_spectrum(const std::string& path, const std::vector<double>& P, int side);
std::vector<double> read_spectrum(const std::string& path, int* side = nullptr);

// Every field file of a directory, sorted by name.
std::vector<Field> read_field_dir(const std::string& dir);

// Coefficient tables in the "PHKT" container.
void write_table(const std::string& path, const CovarianceTable& t);
CovarianceTable read_table(const std::string& path);

std::string format_double(double v);
void write_profile_csv(const std::string& path, const std::vector<ProfilePoint>& rows);
void write_report_csv(const std::string& path, const std::vector<ErrorReport>& rows);
// One row per (restart, iteration).
void write_loss_csv(const std::string& path, const std::vector<std::vector<double>>& losses);
// Columns k, j, a, value with a = l for the table's zero-offset autocorrelations.
void write_table_csv(const std::string& path, const CovarianceTable& t, const WaveletBank& bank);

struct PgmRange {
  double min = 0;
  double max = 0;
};

// 16-bit binary PGM, min-max scaled; the sidecar path + ".json" stores the range.
PgmRange export_pgm(const Field& x, const std::string& path);
Field import_pgm(const std::string& path);

}  // namespace wph
