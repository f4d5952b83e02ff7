#include "foilmqs/errors.hpp"
#include "foilmqs/mesh.hpp"

#include <charconv>
#include <string>
#include <vector>

namespace foil {

namespace {

void append_double(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    /// Next non-empty line split on blanks; throws at end of input.
    std::vector<std::string_view> next(const char* expecting) {
        while (pos_ <= text_.size()) {
            if (pos_ == text_.size()) {
                break;
            }
            auto end = text_.find('\n', pos_);
            if (end == std::string_view::npos) {
                end = text_.size();
            }
            std::string_view line = text_.substr(pos_, end - pos_);
            pos_ = end + 1;
            ++line_;
            if (!line.empty() && line.back() == '\r') {
                line.remove_suffix(1);
            }
            auto fields = split(line);
            if (!fields.empty()) {
                return fields;
            }
        }
        throw ParseError(line_ + 1, std::string("unexpected end of input, expecting ") + expecting);
    }

    bool at_end() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c != ' ' && c != '\t' && c != '\r' && c != '\n') {
                return false;
            }
            ++pos_;
        }
        return true;
    }

    std::size_t line() const { return line_; }

private:
    static std::vector<std::string_view> split(std::string_view line) {
        std::vector<std::string_view> out;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) {
                ++i;
            }
            const std::size_t start = i;
            while (i < line.size() && line[i] != ' ' && line[i] != '\t') {
                ++i;
            }
            if (i > start) {
                out.push_back(line.substr(start, i - start));
            }
        }
        return out;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* what) {
    T value{};
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw ParseError(line, std::string("malformed ") + what + " '" + std::string(field) + "'");
    }
    return value;
}

Index section(LineReader& in, std::string_view keyword) {
    const auto f = in.next(std::string(keyword).c_str());
    if (f.size() != 2 || f[0] != keyword) {
        throw ParseError(in.line(), "expected '" + std::string(keyword) + " <count>'");
    }
    const auto n = parse_number<long long>(f[1], in.line(), "count");
    if (n < 0) {
        throw ParseError(in.line(), "negative count");
    }
    return static_cast<Index>(n);
}

}  // namespace

std::string write_mesh(const Mesh& mesh) {
    std::string out = "foilmesh v1\n";
    out += "nodes " + std::to_string(mesh.node_count()) + "\n";
    for (const auto& p : mesh.nodes()) {
        append_double(out, p.r);
        out += ' ';
        append_double(out, p.z);
        out += '\n';
    }
    out += "triangles " + std::to_string(mesh.triangle_count()) + "\n";
    for (const auto& t : mesh.triangles()) {
        out += std::to_string(t.v[0]) + ' ' + std::to_string(t.v[1]) + ' ' + std::to_string(t.v[2]) + ' ';
        out += region_name(t.region);
        out += '\n';
    }
    Index nb = 0;
    for (bool b : mesh.boundary()) {
        nb += b ? 1 : 0;
    }
    out += "boundary " + std::to_string(nb) + "\n";
    for (Index i = 0; i < mesh.node_count(); ++i) {
        if (mesh.is_boundary(i)) {
            out += std::to_string(i) + '\n';
        }
    }
    return out;
}

Mesh read_mesh(std::string_view text) {
    LineReader in(text);
    {
        const auto f = in.next("header");
        if (f.size() != 2 || f[0] != "foilmesh" || f[1] != "v1") {
            throw ParseError(in.line(), "expected header 'foilmesh v1'");
        }
    }
    const Index n = section(in, "nodes");
    std::vector<Point> nodes;
    nodes.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const auto f = in.next("node coordinates");
        if (f.size() != 2) {
            throw ParseError(in.line(), "expected 'r z'");
        }
        nodes.push_back({parse_number<double>(f[0], in.line(), "coordinate"),
                         parse_number<double>(f[1], in.line(), "coordinate")});
    }
    const Index m = section(in, "triangles");
    std::vector<Triangle> tris;
    tris.reserve(static_cast<std::size_t>(m));
    for (Index t = 0; t < m; ++t) {
        const auto f = in.next("triangle");
        if (f.size() != 4) {
            throw ParseError(in.line(), "expected 'i j k tag'");
        }
        Triangle tri;
        for (std::size_t k = 0; k < 3; ++k) {
            const auto idx = parse_number<long long>(f[k], in.line(), "node index");
            if (idx < 0 || idx >= n) {
                throw ParseError(in.line(), "node index " + std::string(f[k]) + " out of range");
            }
            tri.v[k] = static_cast<Index>(idx);
        }
        const auto region = parse_region(f[3]);
        if (!region) {
            throw ParseError(in.line(), "unknown region tag '" + std::string(f[3]) + "'");
        }
        tri.region = *region;
        tris.push_back(tri);
    }
    const Index b = section(in, "boundary");
    std::vector<bool> boundary(static_cast<std::size_t>(n), false);
    for (Index k = 0; k < b; ++k) {
        const auto f = in.next("boundary node");
        if (f.size() != 1) {
            throw ParseError(in.line(), "expected a single node index");
        }
        const auto idx = parse_number<long long>(f[0], in.line(), "node index");
        if (idx < 0 || idx >= n) {
            throw ParseError(in.line(), "boundary node index out of range");
        }
        boundary[static_cast<std::size_t>(idx)] = true;
    }
    if (!in.at_end()) {
        throw ParseError(in.line() + 1, "trailing content after boundary section");
    }
    return Mesh(std::move(nodes), std::move(tris), std::move(boundary));
}

}  // namespace foil
