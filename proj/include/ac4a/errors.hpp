#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ac4a {

// Root of every error thrown by the engine. `code()` is a stable
// machine-readable tag used in JSON error bodies and CLI diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& message, std::size_t offset)
        : Error("SyntaxError", message + " at offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Tree-definition and web-config documents.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& message) : Error("FormatError", message) {}
};

class DuplicateSibling : public Error {
public:
    explicit DuplicateSibling(const std::string& message) : Error("DuplicateSibling", message) {}
};

class EmptyActionSet : public Error {
public:
    explicit EmptyActionSet(const std::string& message) : Error("EmptyActionSet", message) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message) : Error("ValidationError", message) {}
};

class UnknownTree : public Error {
public:
    explicit UnknownTree(const std::string& message) : Error("UnknownTree", message) {}
};

class TreeMismatch : public Error {
public:
    explicit TreeMismatch(const std::string& message) : Error("TreeMismatch", message) {}
};

class MalformedInterval : public Error {
public:
    explicit MalformedInterval(const std::string& message) : Error("MalformedInterval", message) {}
};

class UnsoundCustomFunction : public Error {
public:
    explicit UnsoundCustomFunction(const std::string& message)
        : Error("UnsoundCustomFunction", message) {}
};

class NotFound : public Error {
public:
    explicit NotFound(const std::string& message) : Error("NotFound", message) {}
};

class UnknownApplication : public Error {
public:
    explicit UnknownApplication(const std::string& message) : Error("UnknownApplication", message) {}
};

class PermissionFunctionError : public Error {
public:
    explicit PermissionFunctionError(const std::string& message)
        : Error("PermissionFunctionError", message) {}
};

class SelectorSyntaxError : public Error {
public:
    SelectorSyntaxError(const std::string& message, std::size_t offset)
        : Error("SelectorSyntaxError", message + " at offset " + std::to_string(offset)) {}
};

class TemplateSyntaxError : public Error {
public:
    TemplateSyntaxError(const std::string& message, std::size_t offset)
        : Error("TemplateSyntaxError", message + " at offset " + std::to_string(offset)) {}
};

class ExtractionError : public Error {
public:
    explicit ExtractionError(const std::string& message) : Error("ExtractionError", message) {}
};

// A caller broke an operation's precondition.
class ContractError : public Error {
public:
    explicit ContractError(const std::string& message) : Error("ContractError", message) {}
};

class StorageError : public Error {
public:
    explicit StorageError(const std::string& message) : Error("StorageUnavailable", message) {}
};

}  // namespace ac4a
