#include "ksudf/geometry/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "ksudf/common/error.hpp"

namespace ksudf {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("file not found: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

int resolve_obj_index(long long idx, std::size_t vertex_count, std::size_t line) {
    if (idx > 0) return static_cast<int>(idx - 1);
    if (idx < 0) return static_cast<int>(static_cast<long long>(vertex_count) + idx);
    throw FormatError("OBJ face index 0 is invalid", line);
}

void fan(const std::vector<int>& poly, std::vector<Triangle>& out) {
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) out.push_back({poly[0], poly[i], poly[i + 1]});
}

}  // namespace

MeshLoadResult parse_obj(const std::string& text) {
    Points3 vertices;
    std::vector<Triangle> triangles;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) throw FormatError("malformed OBJ vertex", line_no);
            vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> poly;
            std::string token;
            while (ls >> token) {
                const auto slash = token.find('/');
                const std::string head = token.substr(0, slash);
                long long idx = 0;
                const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
                if (ec != std::errc() || ptr != head.data() + head.size()) {
                    throw FormatError("malformed OBJ face index '" + token + "'", line_no);
                }
                const int resolved = resolve_obj_index(idx, vertices.size(), line_no);
                if (resolved < 0 || static_cast<std::size_t>(resolved) >= vertices.size()) {
                    throw FormatError("OBJ face references undefined vertex", line_no);
                }
                poly.push_back(resolved);
            }
            if (poly.size() < 3) throw FormatError("OBJ face with fewer than 3 vertices", line_no);
            fan(poly, triangles);
        }
        // vt, vn, g, o, s, usemtl and friends are ignored.
    }
    if (vertices.empty() || triangles.empty()) throw InvalidInputError("OBJ file contains no faces");
    MeshLoadResult result;
    result.mesh = TriangleMesh(std::move(vertices), triangles, &result.dropped_triangles);
    return result;
}

namespace {

enum class PlyEncoding { Ascii, BinaryLE, BinaryBE };

struct PlyProperty {
    std::string name;
    std::string type;        // scalar type, or element type for lists
    std::string count_type;  // empty unless list
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> props;
};

std::size_t ply_type_size(const std::string& t, std::size_t where) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" || t == "float32")
        return 4;
    if (t == "double" || t == "float64") return 8;
    throw FormatError("unknown PLY type '" + t + "'", where);
}

class BinaryReader {
public:
    BinaryReader(const std::string& data, std::size_t pos, bool big_endian)
        : data_(data), pos_(pos), swap_(big_endian != (std::endian::native == std::endian::big)) {}

    double read(const std::string& type) {
        const std::size_t size = ply_type_size(type, pos_);
        if (pos_ + size > data_.size()) throw FormatError("truncated binary PLY body", pos_);
        unsigned char buf[8];
        std::memcpy(buf, data_.data() + pos_, size);
        if (swap_) std::reverse(buf, buf + size);
        pos_ += size;
        if (type == "char" || type == "int8") return static_cast<std::int8_t>(buf[0]);
        if (type == "uchar" || type == "uint8") return buf[0];
        if (type == "short" || type == "int16") return load<std::int16_t>(buf);
        if (type == "ushort" || type == "uint16") return load<std::uint16_t>(buf);
        if (type == "int" || type == "int32") return load<std::int32_t>(buf);
        if (type == "uint" || type == "uint32") return load<std::uint32_t>(buf);
        if (type == "float" || type == "float32") return load<float>(buf);
        return load<double>(buf);
    }

    std::size_t position() const { return pos_; }

private:
    template <class T>
    static double load(const unsigned char* buf) {
        T v;
        std::memcpy(&v, buf, sizeof(T));
        return static_cast<double>(v);
    }

    const std::string& data_;
    std::size_t pos_;
    bool swap_;
};

}  // namespace

MeshLoadResult parse_ply(const std::string& bytes) {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    auto next_line = [&]() -> std::string {
        if (pos >= bytes.size()) throw FormatError("unexpected end of PLY header", line_no);
        auto end = bytes.find('\n', pos);
        if (end == std::string::npos) end = bytes.size();
        std::string l = bytes.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!l.empty() && l.back() == '\r') l.pop_back();
        return l;
    };

    if (next_line() != "ply") throw FormatError("missing 'ply' magic", 1);
    PlyEncoding encoding = PlyEncoding::Ascii;
    std::vector<PlyElement> elements;
    bool have_format = false;
    for (;;) {
        const std::string l = next_line();
        std::istringstream ls(l);
        std::string tag;
        ls >> tag;
        if (tag == "end_header") break;
        if (tag == "comment" || tag == "obj_info" || tag.empty()) continue;
        if (tag == "format") {
            std::string enc;
            ls >> enc;
            if (enc == "ascii") encoding = PlyEncoding::Ascii;
            else if (enc == "binary_little_endian") encoding = PlyEncoding::BinaryLE;
            else if (enc == "binary_big_endian") encoding = PlyEncoding::BinaryBE;
            else throw FormatError("unknown PLY format '" + enc + "'", line_no);
            have_format = true;
        } else if (tag == "element") {
            PlyElement e;
            if (!(ls >> e.name >> e.count)) throw FormatError("malformed PLY element", line_no);
            elements.push_back(std::move(e));
        } else if (tag == "property") {
            if (elements.empty()) throw FormatError("PLY property before element", line_no);
            PlyProperty p;
            std::string first;
            ls >> first;
            if (first == "list") {
                if (!(ls >> p.count_type >> p.type >> p.name)) throw FormatError("malformed PLY list", line_no);
                ply_type_size(p.count_type, line_no);
            } else {
                p.type = first;
                if (!(ls >> p.name)) throw FormatError("malformed PLY property", line_no);
            }
            ply_type_size(p.type, line_no);
            elements.back().props.push_back(std::move(p));
        } else {
            throw FormatError("unexpected PLY header line '" + l + "'", line_no);
        }
    }
    if (!have_format) throw FormatError("PLY header lacks a format line", line_no);

    Points3 vertices;
    std::vector<Triangle> triangles;

    auto handle_record = [&](const PlyElement& e, const std::vector<std::vector<double>>& values) {
        if (e.name == "vertex") {
            double xyz[3] = {0, 0, 0};
            int found = 0;
            for (std::size_t i = 0; i < e.props.size(); ++i) {
                const auto& n = e.props[i].name;
                const int axis = n == "x" ? 0 : n == "y" ? 1 : n == "z" ? 2 : -1;
                if (axis >= 0 && !values[i].empty()) {
                    xyz[axis] = values[i][0];
                    ++found;
                }
            }
            if (found != 3) throw FormatError("PLY vertex lacks x/y/z", line_no);
            vertices.emplace_back(xyz[0], xyz[1], xyz[2]);
        } else if (e.name == "face") {
            for (std::size_t i = 0; i < e.props.size(); ++i) {
                const auto& p = e.props[i];
                if (p.count_type.empty() || (p.name != "vertex_indices" && p.name != "vertex_index")) continue;
                std::vector<int> poly;
                for (double v : values[i]) poly.push_back(static_cast<int>(v));
                if (poly.size() < 3) throw FormatError("PLY face with fewer than 3 vertices", line_no);
                fan(poly, triangles);
            }
        }
    };

    if (encoding == PlyEncoding::Ascii) {
        std::istringstream body(bytes.substr(std::min(pos, bytes.size())));
        std::size_t body_line = line_no;
        for (const auto& e : elements) {
            for (std::size_t r = 0; r < e.count; ++r) {
                std::string l;
                do {
                    if (!std::getline(body, l)) throw FormatError("truncated ASCII PLY body", body_line);
                    ++body_line;
                } while (l.find_first_not_of(" \t\r") == std::string::npos);
                std::istringstream ls(l);
                std::vector<std::vector<double>> values(e.props.size());
                for (std::size_t i = 0; i < e.props.size(); ++i) {
                    const auto& p = e.props[i];
                    double v;
                    if (!p.count_type.empty()) {
                        if (!(ls >> v)) throw FormatError("malformed PLY list count", body_line);
                        for (long long c = 0; c < static_cast<long long>(v); ++c) {
                            double item;
                            if (!(ls >> item)) throw FormatError("malformed PLY list item", body_line);
                            values[i].push_back(item);
                        }
                    } else {
                        if (!(ls >> v)) throw FormatError("malformed PLY value", body_line);
                        values[i].push_back(v);
                    }
                }
                line_no = body_line;
                handle_record(e, values);
            }
        }
    } else {
        BinaryReader reader(bytes, pos, encoding == PlyEncoding::BinaryBE);
        for (const auto& e : elements) {
            for (std::size_t r = 0; r < e.count; ++r) {
                std::vector<std::vector<double>> values(e.props.size());
                for (std::size_t i = 0; i < e.props.size(); ++i) {
                    const auto& p = e.props[i];
                    if (!p.count_type.empty()) {
                        const auto count = static_cast<long long>(reader.read(p.count_type));
                        for (long long c = 0; c < count; ++c) values[i].push_back(reader.read(p.type));
                    } else {
                        values[i].push_back(reader.read(p.type));
                    }
                }
                line_no = reader.position();
                handle_record(e, values);
            }
        }
    }

    for (const auto& t : triangles) {
        for (int idx : t) {
            if (idx < 0 || static_cast<std::size_t>(idx) >= vertices.size()) {
                throw FormatError("PLY face references undefined vertex " + std::to_string(idx), line_no);
            }
        }
    }
    if (vertices.empty() || triangles.empty()) throw InvalidInputError("PLY file contains no faces");
    MeshLoadResult result;
    result.mesh = TriangleMesh(std::move(vertices), triangles, &result.dropped_triangles);
    return result;
}

MeshLoadResult load_mesh(const std::filesystem::path& path, MeshFormat format) {
    if (format == MeshFormat::Auto) {
        const auto ext = lower(path.extension().string());
        if (ext == ".obj") format = MeshFormat::Obj;
        else if (ext == ".ply") format = MeshFormat::Ply;
        else throw InvalidInputError("cannot infer mesh format from '" + path.string() + "'");
    }
    const std::string data = read_file(path);
    return format == MeshFormat::Obj ? parse_obj(data) : parse_ply(data);
}

void write_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    out << std::setprecision(17);
    for (const auto& v : mesh.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& t : mesh.triangles()) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_ply(const TriangleMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    out << "ply\nformat ascii 1.0\nelement vertex " << mesh.vertex_count()
        << "\nproperty double x\nproperty double y\nproperty double z\nelement face "
        << mesh.triangle_count() << "\nproperty list uchar int vertex_indices\nend_header\n";
    out << std::setprecision(17);
    for (const auto& v : mesh.vertices()) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace ksudf
