#pragma once

// JSON (de)serialization for scene specs, shared by the scene file I/O and
// the experiment config loader. Private so the public headers stay free of
// the json dependency.

#include "json.hpp"

#include "hypercs/synthdata.hpp"

namespace hypercs::synthdata {

nlohmann::json scene_to_json(const SceneSpec& s);
SceneSpec scene_from_json(const nlohmann::json& j);

}  // namespace hypercs::synthdata
