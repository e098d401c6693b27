import re, setuptools, os.path

description = "Numerical lab for mixed-norm (Orlicz type) inequalities of " \
              "multilinear forms."
if os.path.exists("README.md"):
    with open("README.md", "r") as fh:
        long_description = fh.read()
else:
    long_description = description

with open("./orliczlab/__init__.py", "r") as f:
    MATCH_EXPR = "__version__[^'\"]+(['\"])([^'\"]+)"
    VERSION = re.search(MATCH_EXPR, f.read()).group(2)

setuptools.setup(
    name="orliczlab",
    version=VERSION,
    description=description,
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["test", "test.*"]),
    python_requires='>=3.9.0',
    install_requires=[
        "numpy>=1.24.2",
        "scipy>=1.10.0",
        "Pygments==2.17.2",
    ],
    extras_require={
        "test": [
            "hypothesis>=6.70.0",
        ]
    },
    include_package_data=True,
    package_data={
        "orliczlab": ["templates/*.ini"],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    entry_points={
        "console_scripts": [
            "orliczlab = orliczlab.orliczlab:main",
        ]
    },
)
