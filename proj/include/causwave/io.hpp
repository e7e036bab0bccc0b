#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "causwave/arc1d.hpp"
#include "causwave/caustic.hpp"
#include "causwave/raster.hpp"

namespace causwave {

/// Every number leaving the program goes through this: %.9g.
std::string fmt9(double v);
double round9(double v);

/// Rounds every floating value in a JSON tree to 9 significant digits.
nlohmann::json rounded(const nlohmann::json& j);
void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// x, y, value rows; NaN written as "nan" outside the field's domain.
void write_raster_csv(const std::string& path, const Raster& r);
Raster read_raster_csv(const std::string& path);

nlohmann::json to_json(const Caustic& c);
Caustic caustic_from_json(const nlohmann::json& j);

/// One block per arc: k, u, x, y, psi, X, Y, A, p_cl, X_cl (missing fields as NaN).
void write_arc_waves_csv(const std::string& path, const std::array<ArcWave, 4>& waves);

}  // namespace causwave
