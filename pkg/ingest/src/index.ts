export * from "./types.js";
export * from "./mapping.js";
export * from "./convert.js";
export * from "./tree.js";
export * from "./bundle.js";
export * from "./parity.js";
