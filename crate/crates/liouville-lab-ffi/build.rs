fn main() {
    // the committed header is regenerated only on request, so plain builds
    // of the workspace stay free of the cbindgen dependency chain
    #[cfg(feature = "regen-header")]
    {
        let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
        cbindgen::Builder::new()
            .with_crate(&crate_dir)
            .with_config(cbindgen::Config::from_file(format!("{crate_dir}/cbindgen.toml")).unwrap())
            .generate()
            .expect("cbindgen failed")
            .write_to_file(format!("{crate_dir}/include/liouville_lab.h"));
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
