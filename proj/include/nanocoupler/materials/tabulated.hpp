#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "nanocoupler/core/error.hpp"
#include "nanocoupler/core/units.hpp"

namespace nc::materials {

struct OpticsSample {
    double wavelength_nm;
    double eps_re;
    double eps_im;

    Complex eps() const { return {eps_re, eps_im}; }
};

/// Experimental permittivity samples for one material. Wavelengths are
/// strictly increasing and Im eps >= 0 (exp(-iwt) convention).
class TabulatedOptics {
public:
    TabulatedOptics(std::vector<OpticsSample> entries, std::string source_label)
        : entries_(std::move(entries)), label_(std::move(source_label))
    {
        if (entries_.size() < 2)
            throw Error(ErrorKind::Config, "tabulated optics '" + label_ + "' needs at least 2 entries");
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (!(entries_[i].wavelength_nm > 0.0))
                throw Error(ErrorKind::Config, "non-positive wavelength in '" + label_ + "'");
            if (entries_[i].eps_im < 0.0)
                throw Error(ErrorKind::Config, "negative Im eps (active medium) in '" + label_ + "'");
            if (i > 0 && !(entries_[i].wavelength_nm > entries_[i - 1].wavelength_nm))
                throw Error(ErrorKind::Config, "wavelengths not strictly increasing in '" + label_ + "'");
        }
    }

    /// Whitespace-separated `lambda_nm eps_re eps_im`, `#` starts a comment.
    /// A `# source: <text>` line sets the label; rows are sorted by wavelength.
    static TabulatedOptics parse(std::istream& in, std::string fallback_label)
    {
        std::vector<OpticsSample> rows;
        std::string label = std::move(fallback_label);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) {
                const std::string comment = line.substr(hash + 1);
                const auto tag = comment.find("source:");
                if (hash == line.find_first_not_of(" \t") && tag != std::string::npos) {
                    std::string s = comment.substr(tag + 7);
                    s.erase(0, s.find_first_not_of(" \t"));
                    label = s;
                }
                line.erase(hash);
            }
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::istringstream ls(line);
            OpticsSample s{};
            if (!(ls >> s.wavelength_nm >> s.eps_re >> s.eps_im))
                throw Error(ErrorKind::Config, "malformed material row at line " + std::to_string(lineno));
            rows.push_back(s);
        }
        std::sort(rows.begin(), rows.end(),
                  [](const auto& a, const auto& b) { return a.wavelength_nm < b.wavelength_nm; });
        return TabulatedOptics(std::move(rows), std::move(label));
    }

    static TabulatedOptics load(const std::filesystem::path& path)
    {
        std::ifstream in(path);
        if (!in) throw Error(ErrorKind::Io, "cannot open material file " + path.string());
        return parse(in, path.stem().string());
    }

    std::span<const OpticsSample> entries() const { return entries_; }
    const std::string& label() const { return label_; }
    double min_wavelength() const { return entries_.front().wavelength_nm; }
    double max_wavelength() const { return entries_.back().wavelength_nm; }

    bool covers(double lo_nm, double hi_nm) const
    {
        return lo_nm >= min_wavelength() && hi_nm <= max_wavelength();
    }

    /// Linear interpolation of Re and Im eps in wavelength.
    Complex interpolate(double lambda_nm) const
    {
        if (lambda_nm < min_wavelength() || lambda_nm > max_wavelength())
            throw Error(ErrorKind::Coverage, "wavelength " + std::to_string(lambda_nm) +
                                                 " nm outside table '" + label_ + "'");
        auto hi = std::lower_bound(entries_.begin(), entries_.end(), lambda_nm,
                                   [](const OpticsSample& s, double l) { return s.wavelength_nm < l; });
        if (hi == entries_.begin()) return hi->eps();
        auto lo = hi - 1;
        const double t = (lambda_nm - lo->wavelength_nm) / (hi->wavelength_nm - lo->wavelength_nm);
        return (1.0 - t) * lo->eps() + t * hi->eps();
    }

private:
    std::vector<OpticsSample> entries_;
    std::string label_;
};

}  // namespace nc::materials
