#pragma once

#include <string>

#include <json.hpp>

#include "ncb/cpmaps.hpp"
#include "ncb/matrix.hpp"
#include "ncb/opsys.hpp"

namespace ncb {

using Json = nlohmann::json;

/// {"rows":r,"cols":c,"data":[[[re,im],...],...]}
Json matrix_to_json(const Mat& m);
Mat matrix_from_json(const Json& j, const std::string& context = "matrix");

Json complex_to_json(Scalar z);

/// {"ambient_dim":l,"generators":[matrix,...]}; the basis is recomputed on load.
Json system_to_json(const OperatorSystem& s);
OperatorSystem system_from_json(const Json& j, const Tolerance& tol = {});

/// {"target_dim":n,"values":[matrix per basis element],"choi":matrix?}.
/// On input a Choi matrix on M_l or a "kraus" list may replace "values".
Json ucp_to_json(const UcpMap& phi);
Json cp_to_json(const CpCone& psi);
UcpMap ucp_from_json(const Json& j, SystemPtr domain, const Tolerance& tol = {});

/// Parse a file, annotating syntax errors with line/column.
Json read_json_file(const std::string& path);
Json parse_json_text(const std::string& text, const std::string& source);

}  // namespace ncb
