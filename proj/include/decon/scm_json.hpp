#pragma once

#include <iosfwd>
#include <string>

#include "decon/scm.hpp"

namespace decon {

// JSON schema "decon-scm/1": {format, names, roles, theta (row-major flat),
// mu, error_cov (row-major flat)}.
std::string scm_to_json(const LinearScm& scm);
LinearScm scm_from_json(const std::string& text);
LinearScm load_scm_file(const std::string& path);
void save_scm_file(const LinearScm& scm, const std::string& path);

}  // namespace decon
