pub mod contracts;
pub mod mapping;
pub mod pattern;
pub mod pm;
pub mod secdfd;
pub mod taint;
pub mod workbench;
