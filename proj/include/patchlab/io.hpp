#pragma once

#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "patchlab/curve_geometry.hpp"

namespace patchlab {

/// %.17g; round-trips every finite double.
std::string format_double(double v);

/// Curve snapshot {"n","time","x","y"}.
std::string curve_to_json(const CurveState& curve);
/// Intrinsic snapshot {"n","time","g","kappa","theta0","gamma0":[x,y]}.
std::string intrinsic_to_json(const IntrinsicState& state);

void save_curve(const CurveState& curve, const std::string& path);
void save_intrinsic(const IntrinsicState& state, const std::string& path);

/// Throws MalformedFile (with byte offset) on syntax or schema errors.
CurveState load_curve(const std::string& path);
IntrinsicState load_intrinsic(const std::string& path);

using AnySnapshot = std::variant<CurveState, IntrinsicState>;
AnySnapshot load_snapshot(const std::string& path);

/// Writes a text file atomically enough for our purposes; InputError on failure.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::initializer_list<const char*> header);
  void row(std::initializer_list<double> values);
  void row(std::span<const double> values);

 private:
  std::ofstream out_;
  std::string path_;
  std::size_t columns_;
};

}  // namespace patchlab
