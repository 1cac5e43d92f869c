#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace decon {

enum class Role { Feature, Confounder, Mediator, Response };

const char* role_name(Role r);
Role role_from_name(const std::string& name);

// Sample table with role-tagged columns, stored column-major so the kernels
// stream over contiguous memory. Immutable after construction apart from
// column writes during building.
class Dataset {
  public:
    Dataset() = default;
    Dataset(std::vector<std::string> names, std::vector<Role> roles, std::size_t n,
            std::string provenance = "simulated");

    std::size_t n() const { return n_; }
    std::size_t n_cols() const { return names_.size(); }

    const std::vector<std::string>& names() const { return names_; }
    const std::vector<Role>& roles() const { return roles_; }
    const std::string& provenance() const { return provenance_; }
    void set_provenance(std::string p) { provenance_ = std::move(p); }

    std::span<double> column(std::size_t i);
    std::span<const double> column(std::size_t i) const;

    // Column index by name; -1 if absent.
    std::ptrdiff_t find(const std::string& name) const;
    std::span<const double> column_by_name(const std::string& name) const;

    // Indices of all columns with the given role, in table order.
    std::vector<std::size_t> role_indices(Role r) const;

    // Throws InputError if any value is non-finite or the table is empty.
    void check_finite() const;

  private:
    std::vector<std::string> names_;
    std::vector<Role> roles_;
    std::size_t n_ = 0;
    std::vector<double> data_;  // column-major, stride n_
    std::string provenance_;
};

// CSV with a `name:role` header and shortest round-trip decimal values.
// Lines starting with '#' before the header carry metadata ("# key: value");
// the `provenance` key is honored on load.
void write_csv(const Dataset& d, std::ostream& os);
void write_csv_file(const Dataset& d, const std::string& path);
Dataset read_csv(std::istream& is);
Dataset read_csv_file(const std::string& path);

}  // namespace decon
