#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>

#include "nanocoupler/core/error.hpp"
#include "nanocoupler/materials/fit.hpp"
#include "nanocoupler/materials/material.hpp"
#include "nanocoupler/materials/tabulated.hpp"

#ifndef NANOCOUPLER_DEFAULT_DATA_DIR
#define NANOCOUPLER_DEFAULT_DATA_DIR "data/materials"
#endif

namespace nc::materials {

inline constexpr double silica_index = 1.45;
inline constexpr double silicon_index_1550 = 3.48;

inline constexpr const char* data_dir_env = "NANOCOUPLER_DATA_DIR";

inline std::filesystem::path default_data_dir()
{
    if (const char* env = std::getenv(data_dir_env); env && *env) return env;
    return NANOCOUPLER_DEFAULT_DATA_DIR;
}

/// Default dataset per metal: the handbook-lineage tables.
inline std::string default_dataset(const std::string& metal)
{
    (void)metal;
    return "rakic";
}

/// Loads and caches `<metal>_<dataset>.txt` from the data directory.
class MaterialLibrary {
public:
    explicit MaterialLibrary(std::filesystem::path dir = default_data_dir()) : dir_(std::move(dir)) {}

    const std::filesystem::path& directory() const { return dir_; }

    const TabulatedOptics& table(const std::string& metal, const std::string& dataset)
    {
        const std::string key = metal + "_" + (dataset.empty() ? default_dataset(metal) : dataset);
        std::lock_guard lock(mutex_);
        auto it = tables_.find(key);
        if (it == tables_.end()) it = tables_.emplace(key, TabulatedOptics::load(dir_ / (key + ".txt"))).first;
        return it->second;
    }

    MaterialModel metal(const std::string& metal, const std::string& dataset, double lambda_nm)
    {
        const auto& t = table(metal, dataset);
        auto m = fitted_material(t, lambda_nm);
        m.label = metal + "_" + (dataset.empty() ? default_dataset(metal) : dataset) + " (" + t.label() + ")";
        return m;
    }

private:
    std::filesystem::path dir_;
    std::map<std::string, TabulatedOptics> tables_;
    std::mutex mutex_;
};

}  // namespace nc::materials
