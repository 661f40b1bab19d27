#pragma once

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nanocoupler/core/error.hpp"
#include "nanocoupler/experiments/digest.hpp"

namespace nc::io {

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Collects CSV rows in memory; numbers use the round-trip format so equal
/// results give byte-equal files.
class Csv {
public:
    explicit Csv(std::vector<std::string> header) : cols_(header.size())
    {
        line(header);
    }

    Csv& row(const std::vector<double>& v)
    {
        std::vector<std::string> s;
        for (double x : v) s.push_back(experiments::fmt(x));
        return line(s);
    }

    Csv& line(const std::vector<std::string>& cells)
    {
        if (cells.size() != cols_) throw Error(ErrorKind::Io, "CSV row has the wrong number of columns");
        for (std::size_t k = 0; k < cells.size(); ++k) text_ += (k ? "," : "") + cells[k];
        text_ += "\n";
        return *this;
    }

    const std::string& text() const { return text_; }

private:
    std::size_t cols_;
    std::string text_;
};

/// Output directory plus the manifest describing everything written to it.
class ArtifactSet {
public:
    ArtifactSet(std::filesystem::path dir, std::string command, std::string config_text)
        : dir_(std::move(dir))
    {
        manifest_["command"] = std::move(command);
        manifest_["config_digest"] = experiments::fnv1a_hex(config_text);
        manifest_["config"] = std::move(config_text);
        manifest_["artifacts"] = nlohmann::json::array();
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw Error(ErrorKind::Io, "cannot create " + dir_.string() + ": " + ec.message());
    }

    const std::filesystem::path& dir() const { return dir_; }
    nlohmann::json& manifest() { return manifest_; }

    void write(const std::string& name, const std::string& content)
    {
        std::ofstream out(dir_ / name, std::ios::binary);
        out << content;
        if (!out) throw Error(ErrorKind::Io, "cannot write " + (dir_ / name).string());
        manifest_["artifacts"].push_back({{"file", name}, {"fnv1a", experiments::fnv1a_hex(content)}});
    }

    void write(const std::string& name, const Csv& csv) { write(name, csv.text()); }

    void add_labels(const std::vector<std::string>& labels)
    {
        auto& l = manifest_["material_labels"];
        if (l.is_null()) l = nlohmann::json::array();
        for (const auto& s : labels)
            if (std::find(l.begin(), l.end(), s) == l.end()) l.push_back(s);
    }

    void finish() { write("manifest.json", manifest_.dump(2) + "\n"); }

private:
    std::filesystem::path dir_;
    nlohmann::json manifest_;
};

}  // namespace nc::io
