#pragma once

// Text formats. All reals are written with 17 significant digits so values
// round-trip exactly.
//
//   matrix CSV   "# matrix <rows> <cols>" then one comma-separated row per line
//   dataset CSV  "# key=value" comment lines, a "s,y" header, one row per step
//   key-values   flat "key=value" lines (manifests); '#' starts a comment

#include "desn/deep.hpp"
#include "desn/evaluation.hpp"
#include "desn/memory_capacity.hpp"
#include "desn/narma.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace desn {

std::string format_real(double v);

void write_matrix_csv(std::ostream& out, const Eigen::Ref<const Matrix>& m);
Matrix read_matrix_csv(std::istream& in);
void write_matrix_file(const std::filesystem::path& path, const Eigen::Ref<const Matrix>& m);
Matrix read_matrix_file(const std::filesystem::path& path);

void write_dataset_csv(std::ostream& out, const NarmaSeries& series, const NarmaConfig& config);
NarmaSeries read_dataset_csv(std::istream& in);

/// Ordered key/value pairs; duplicate keys are kept.
class KeyValues {
public:
    void set(std::string key, std::string value);
    void set(std::string key, double value) { set(std::move(key), format_real(value)); }
    const std::string* find(std::string_view key) const;
    /// Throws data_error if missing.
    const std::string& at(std::string_view key) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

void write_key_values(std::ostream& out, const KeyValues& kv);
KeyValues read_key_values(std::istream& in);

/// "# key=value" parameter block, then "k,C_k" rows.
void write_mc_report_csv(std::ostream& out, const McReport& report);

/// architecture,parameter_name,parameter,seed,train_nrmse,test_nrmse,error
/// (plus wall_ms when `timing` is set).
void write_sweep_csv(std::ostream& out, const SweepResult& result, SweptParameter parameter, bool timing = false);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows, SweptParameter parameter);

/// Writes <dir>/model.manifest plus V, W and U matrix files per reservoir.
/// Returns every written path, manifest first.
std::vector<std::filesystem::path> save_model(const std::filesystem::path& dir, const Model& model);
Model load_model(const std::filesystem::path& manifest);

}  // namespace desn
