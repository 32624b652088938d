#pragma once

// Minimal streaming XML for the library's own dialects: elements, attributes,
// character data, comments and processing instructions. Only the five
// predefined entities and numeric character references are understood; DTDs
// are rejected.

#include <zlib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "corrhist/errors.hpp"

namespace corrhist::xml {

/// Pull-style byte producer.
class ByteSource {
public:
    virtual ~ByteSource() = default;
    /// Fills up to `n` bytes, returns 0 at end of stream.
    virtual std::size_t read(char* buf, std::size_t n) = 0;
};

class StringSource final : public ByteSource {
public:
    explicit StringSource(std::string_view data) : data_(data) {}
    std::size_t read(char* buf, std::size_t n) override {
        std::size_t k = std::min(n, data_.size() - pos_);
        std::memcpy(buf, data_.data() + pos_, k);
        pos_ += k;
        return k;
    }

private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

class StreamSource final : public ByteSource {
public:
    explicit StreamSource(std::istream& in) : in_(in) {}
    std::size_t read(char* buf, std::size_t n) override {
        in_.read(buf, static_cast<std::streamsize>(n));
        return static_cast<std::size_t>(in_.gcount());
    }

private:
    std::istream& in_;
};

class FileSource final : public ByteSource {
public:
    explicit FileSource(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_)
            throw Error("cannot open '" + path + "'");
    }
    std::size_t read(char* buf, std::size_t n) override {
        in_.read(buf, static_cast<std::streamsize>(n));
        return static_cast<std::size_t>(in_.gcount());
    }

private:
    std::ifstream in_;
};

/// Replays a few already-consumed bytes before continuing with the inner source.
class PrefixedSource final : public ByteSource {
public:
    PrefixedSource(std::string prefix, std::unique_ptr<ByteSource> inner)
        : prefix_(std::move(prefix)), inner_(std::move(inner)) {}
    std::size_t read(char* buf, std::size_t n) override {
        if (pos_ < prefix_.size()) {
            std::size_t k = std::min(n, prefix_.size() - pos_);
            std::memcpy(buf, prefix_.data() + pos_, k);
            pos_ += k;
            return k;
        }
        return inner_->read(buf, n);
    }

private:
    std::string prefix_;
    std::size_t pos_ = 0;
    std::unique_ptr<ByteSource> inner_;
};

/// gzip decompression over another source. Concatenated members are accepted.
class InflateSource final : public ByteSource {
public:
    explicit InflateSource(std::unique_ptr<ByteSource> inner) : inner_(std::move(inner)) {
        std::memset(&zs_, 0, sizeof zs_);
        if (inflateInit2(&zs_, 15 + 16) != Z_OK)
            throw Error("inflateInit2 failed");
    }
    ~InflateSource() override { inflateEnd(&zs_); }
    InflateSource(const InflateSource&) = delete;
    InflateSource& operator=(const InflateSource&) = delete;

    std::size_t read(char* buf, std::size_t n) override {
        zs_.next_out = reinterpret_cast<Bytef*>(buf);
        zs_.avail_out = static_cast<uInt>(n);
        while (zs_.avail_out == n && !done_) {
            if (zs_.avail_in == 0) {
                std::size_t k = inner_->read(in_.data(), in_.size());
                if (k == 0) {
                    if (!stream_end_)
                        throw ParseError("truncated gzip stream", zs_.total_in);
                    done_ = true;
                    break;
                }
                zs_.next_in = reinterpret_cast<Bytef*>(in_.data());
                zs_.avail_in = static_cast<uInt>(k);
            }
            if (stream_end_) {
                // another gzip member follows
                inflateReset(&zs_);
                stream_end_ = false;
            }
            int rc = inflate(&zs_, Z_NO_FLUSH);
            if (rc == Z_STREAM_END)
                stream_end_ = true;
            else if (rc != Z_OK && rc != Z_BUF_ERROR)
                throw ParseError(std::string("gzip data error: ") + (zs_.msg ? zs_.msg : "unknown"), zs_.total_in);
        }
        return n - zs_.avail_out;
    }

private:
    std::unique_ptr<ByteSource> inner_;
    z_stream zs_;
    std::array<char, 1 << 16> in_{};
    bool stream_end_ = false;
    bool done_ = false;
};

/// Wraps `src` in an InflateSource when the stream starts with the gzip magic.
inline std::unique_ptr<ByteSource> auto_decompress(std::unique_ptr<ByteSource> src) {
    char head[2];
    std::size_t got = 0;
    while (got < 2) {
        std::size_t k = src->read(head + got, 2 - got);
        if (k == 0)
            break;
        got += k;
    }
    auto replay = std::make_unique<PrefixedSource>(std::string(head, got), std::move(src));
    if (got == 2 && static_cast<unsigned char>(head[0]) == 0x1f && static_cast<unsigned char>(head[1]) == 0x8b)
        return std::make_unique<InflateSource>(std::move(replay));
    return replay;
}

inline std::string gzip_compress(std::string_view data, int level = 6) {
    z_stream zs;
    std::memset(&zs, 0, sizeof zs);
    if (deflateInit2(&zs, level, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw Error("deflateInit2 failed");
    std::string out;
    out.resize(deflateBound(&zs, static_cast<uLong>(data.size())) + 32);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END)
        throw Error("gzip compression failed");
    out.resize(zs.total_out);
    return out;
}

/// Buffered byte consumer; flush() must be called before destruction.
class ByteSink {
public:
    virtual ~ByteSink() = default;
    virtual void write(std::string_view bytes) = 0;
    virtual void flush() {}
};

class StreamSink final : public ByteSink {
public:
    explicit StreamSink(std::ostream& out) : out_(out) {}
    void write(std::string_view bytes) override { out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size())); }
    void flush() override {
        out_.flush();
        if (!out_)
            throw Error("write failed");
    }

private:
    std::ostream& out_;
};

class StringSink final : public ByteSink {
public:
    void write(std::string_view bytes) override { data_.append(bytes); }
    std::string& data() noexcept { return data_; }

private:
    std::string data_;
};

/// gzip compression into another sink. The gzip header carries no timestamp,
/// so output is a pure function of the input bytes.
class GzipSink final : public ByteSink {
public:
    explicit GzipSink(ByteSink& inner, int level = 6) : inner_(inner) {
        std::memset(&zs_, 0, sizeof zs_);
        if (deflateInit2(&zs_, level, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
            throw Error("deflateInit2 failed");
    }
    ~GzipSink() override { deflateEnd(&zs_); }
    GzipSink(const GzipSink&) = delete;
    GzipSink& operator=(const GzipSink&) = delete;

    void write(std::string_view bytes) override { pump(bytes, Z_NO_FLUSH); }
    void flush() override {
        if (finished_)
            return;
        pump({}, Z_FINISH);
        finished_ = true;
        inner_.flush();
    }

private:
    void pump(std::string_view bytes, int mode) {
        zs_.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
        zs_.avail_in = static_cast<uInt>(bytes.size());
        for (;;) {
            zs_.next_out = reinterpret_cast<Bytef*>(out_.data());
            zs_.avail_out = static_cast<uInt>(out_.size());
            int rc = deflate(&zs_, mode);
            if (rc == Z_STREAM_ERROR)
                throw Error("gzip compression failed");
            inner_.write(std::string_view(out_.data(), out_.size() - zs_.avail_out));
            if (mode == Z_FINISH ? rc == Z_STREAM_END : (zs_.avail_in == 0 && zs_.avail_out != 0))
                break;
        }
    }

    ByteSink& inner_;
    z_stream zs_;
    std::array<char, 1 << 16> out_{};
    bool finished_ = false;
};

/// Escapes the five XML special characters.
inline void escape_into(std::string& out, std::string_view s) {
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
}

inline std::string escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    escape_into(out, s);
    return out;
}

struct Attribute {
    std::string name;
    std::string value;
};

/// Pull parser. Each call to next() yields one event; a self-closing element
/// produces Start followed by End.
class Reader {
public:
    enum class Event { Start, End, Text, Eof };

    explicit Reader(std::unique_ptr<ByteSource> src, std::size_t chunk = 1 << 16)
        : src_(std::move(src)), buf_(chunk) {}

    Event next() {
        if (pending_end_) {
            pending_end_ = false;
            event_offset_ = offset();
            name_ = stack_.back();
            stack_.pop_back();
            if (stack_.empty())
                root_closed_ = true;
            return Event::End;
        }
        for (;;) {
            event_offset_ = offset();
            int c = peek();
            if (c < 0) {
                if (!stack_.empty())
                    fail("unexpected end of input inside <" + stack_.back() + ">");
                if (!seen_root_)
                    fail("document has no root element");
                return Event::Eof;
            }
            if (c != '<') {
                read_text();
                if (stack_.empty()) {
                    if (!all_space(text_))
                        fail("character data outside the root element");
                    continue;
                }
                return Event::Text;
            }
            get();
            c = peek();
            if (c == '?') {
                skip_until("?>");
                continue;
            }
            if (c == '!') {
                get();
                if (peek() == '-') {
                    expect('-');
                    expect('-');
                    skip_until("-->");
                    continue;
                }
                fail("DTDs and CDATA sections are not supported");
            }
            if (c == '/') {
                get();
                read_name(name_);
                skip_space();
                expect('>');
                if (stack_.empty() || stack_.back() != name_)
                    fail("mismatched closing tag </" + name_ + ">");
                stack_.pop_back();
                if (stack_.empty())
                    root_closed_ = true;
                return Event::End;
            }
            read_start_tag();
            return Event::Start;
        }
    }

    const std::string& name() const noexcept { return name_; }
    const std::string& text() const noexcept { return text_; }
    const std::vector<Attribute>& attributes() const noexcept { return attrs_; }
    std::size_t depth() const noexcept { return stack_.size(); }

    const std::string* attribute(std::string_view key) const {
        for (const auto& a : attrs_)
            if (a.name == key)
                return &a.value;
        return nullptr;
    }

    const std::string& require(std::string_view key) const {
        const std::string* v = attribute(key);
        if (!v)
            fail("<" + name_ + "> lacks attribute '" + std::string(key) + "'");
        return *v;
    }

    /// Rejects attributes other than `allowed` on the current start tag.
    void only_attributes(std::initializer_list<std::string_view> allowed) const {
        for (const auto& a : attrs_)
            if (std::find(allowed.begin(), allowed.end(), a.name) == allowed.end())
                fail("unexpected attribute '" + a.name + "' on <" + name_ + ">");
    }

    /// Reads the character content of the current element up to its end tag.
    std::string read_text_content() {
        std::string out;
        std::string el = name_;
        for (;;) {
            Event e = next();
            if (e == Event::Text)
                out += text_;
            else if (e == Event::End)
                return out;
            else
                fail("unexpected child element <" + name_ + "> in <" + el + ">");
        }
    }

    /// Consumes events up to and including the end of the current element.
    void skip_element() {
        std::size_t target = stack_.size() - 1;
        while (stack_.size() > target || pending_end_) {
            if (next() == Event::Eof)
                return;
        }
    }

    template <typename Int>
    Int parse_int(const std::string& s, std::string_view what) const {
        Int v{};
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || s.empty())
            fail("invalid " + std::string(what) + " '" + s + "'");
        return v;
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, event_offset_); }

    std::uint64_t offset() const noexcept { return consumed_ + pos_; }
    std::uint64_t event_offset() const noexcept { return event_offset_; }

    /// Largest amount of input-side memory held at any point: the chunk buffer
    /// plus the largest single token. Independent of the input length.
    std::size_t high_water() const noexcept { return buf_.size() + max_token_; }

private:
    int peek() {
        if (pos_ == len_ && !fill())
            return -1;
        return static_cast<unsigned char>(buf_[pos_]);
    }
    int get() {
        int c = peek();
        if (c >= 0)
            ++pos_;
        return c;
    }
    bool fill() {
        if (eof_)
            return false;
        consumed_ += len_;
        pos_ = 0;
        len_ = src_->read(buf_.data(), buf_.size());
        if (len_ == 0) {
            eof_ = true;
            return false;
        }
        return true;
    }
    void expect(char ch) {
        int c = get();
        if (c != ch) {
            event_offset_ = offset();
            fail(std::string("expected '") + ch + "'");
        }
    }
    static bool is_space(int c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
    static bool all_space(const std::string& s) {
        return std::all_of(s.begin(), s.end(), [](char c) { return is_space(c); });
    }
    void skip_space() {
        while (is_space(peek()))
            get();
    }
    static bool is_name_char(int c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
               c == '.' || c == ':' || c >= 0x80;
    }
    void read_name(std::string& out) {
        out.clear();
        while (is_name_char(peek()))
            out += static_cast<char>(get());
        if (out.empty())
            fail("expected a name");
        note_token(out.size());
    }
    void note_token(std::size_t n) { max_token_ = std::max(max_token_, n); }

    void skip_until(std::string_view term) {
        std::size_t matched = 0;
        while (matched < term.size()) {
            int c = get();
            if (c < 0)
                fail("unterminated construct, expected '" + std::string(term) + "'");
            if (c == term[matched])
                ++matched;
            else
                matched = (c == term[0]) ? 1 : 0;
        }
    }

    void read_reference(std::string& out) {
        // '&' already consumed
        std::string ref;
        for (;;) {
            int c = get();
            if (c < 0)
                fail("unterminated character reference");
            if (c == ';')
                break;
            ref += static_cast<char>(c);
            if (ref.size() > 12)
                fail("unterminated character reference");
        }
        if (ref == "amp")
            out += '&';
        else if (ref == "lt")
            out += '<';
        else if (ref == "gt")
            out += '>';
        else if (ref == "quot")
            out += '"';
        else if (ref == "apos")
            out += '\'';
        else if (ref.size() > 1 && ref[0] == '#') {
            unsigned long cp = 0;
            const char* b = ref.data() + 1;
            int base = 10;
            if (*b == 'x') {
                ++b;
                base = 16;
            }
            auto [p, ec] = std::from_chars(b, ref.data() + ref.size(), cp, base);
            if (ec != std::errc() || p != ref.data() + ref.size() || cp == 0 || cp > 0x10FFFF)
                fail("invalid character reference &" + ref + ";");
            append_utf8(out, static_cast<char32_t>(cp));
        } else
            fail("unknown entity &" + ref + ";");
    }

    static void append_utf8(std::string& out, char32_t cp) {
        if (cp < 0x80)
            out += static_cast<char>(cp);
        else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }

    void read_text() {
        text_.clear();
        for (;;) {
            int c = peek();
            if (c < 0 || c == '<')
                break;
            get();
            if (c == '&')
                read_reference(text_);
            else if (c == '>')
                fail("unescaped '>' in character data");
            else
                text_ += static_cast<char>(c);
        }
        note_token(text_.size());
    }

    void read_start_tag() {
        if (root_closed_)
            fail("content after the root element");
        read_name(name_);
        attrs_.clear();
        for (;;) {
            bool had_space = is_space(peek());
            skip_space();
            int c = peek();
            if (c == '/') {
                get();
                expect('>');
                pending_end_ = true;
                break;
            }
            if (c == '>') {
                get();
                break;
            }
            if (c < 0)
                fail("unexpected end of input in <" + name_ + ">");
            if (!had_space)
                fail("expected whitespace between attributes in <" + name_ + ">");
            Attribute a;
            read_name(a.name);
            skip_space();
            expect('=');
            skip_space();
            int q = get();
            if (q != '"' && q != '\'')
                fail("attribute value must be quoted");
            for (;;) {
                int ch = get();
                if (ch < 0)
                    fail("unterminated attribute value");
                if (ch == q)
                    break;
                if (ch == '<')
                    fail("'<' in attribute value");
                if (ch == '&')
                    read_reference(a.value);
                else
                    a.value += static_cast<char>(ch);
            }
            note_token(a.value.size());
            for (const auto& o : attrs_)
                if (o.name == a.name)
                    fail("duplicate attribute '" + a.name + "'");
            attrs_.push_back(std::move(a));
        }
        if (stack_.empty()) {
            if (seen_root_)
                fail("more than one root element");
            seen_root_ = true;
        }
        stack_.push_back(name_);
    }

    std::unique_ptr<ByteSource> src_;
    std::vector<char> buf_;
    std::size_t pos_ = 0;
    std::size_t len_ = 0;
    std::uint64_t consumed_ = 0;
    bool eof_ = false;

    std::uint64_t event_offset_ = 0;
    std::string name_;
    std::string text_;
    std::vector<Attribute> attrs_;
    std::vector<std::string> stack_;
    bool pending_end_ = false;
    bool seen_root_ = false;
    bool root_closed_ = false;
    std::size_t max_token_ = 0;
};

inline constexpr std::string_view declaration = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

/// Appends ` name="escaped value"`.
inline void put_attr(std::string& out, std::string_view name, std::string_view value) {
    out += ' ';
    out += name;
    out += "=\"";
    escape_into(out, value);
    out += '"';
}

}  // namespace corrhist::xml
